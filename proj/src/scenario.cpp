#include "opo/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string_view>

#include "opo/constants.hpp"
#include "opo/error.hpp"

namespace opo {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos)
            return out;
        start = pos + 1;
    }
}

double parse_double(std::string_view text, const std::string& key) {
    text = trim(text);
    if (!text.empty() && text.front() == '+')
        text.remove_prefix(1);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty())
        throw ConfigError("expected a number, got '" + std::string(text) + "'", key);
    return value;
}

template <typename Int>
Int parse_integer(std::string_view text, const std::string& key) {
    text = trim(text);
    Int value{};
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty())
        throw ConfigError("expected an integer, got '" + std::string(text) + "'", key);
    return value;
}

template <typename Int>
std::string format_integer(Int value) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, end);
}

struct Field {
    std::string section;
    std::string name;
    std::function<void(Scenario&, std::string_view, const std::string&)> read;
    std::function<std::optional<std::string>(const Scenario&)> write;
    bool required = false;
    std::string path() const { return section + "." + name; }
};

Field real(std::string section, std::string name, double Scenario::*member) {
    return {std::move(section), std::move(name),
            [member](Scenario& s, std::string_view v, const std::string& key) { s.*member = parse_double(v, key); },
            [member](const Scenario& s) -> std::optional<std::string> { return format_number(s.*member); }};
}

Field optional_real(std::string section, std::string name, std::optional<double> Scenario::*member) {
    return {std::move(section), std::move(name),
            [member](Scenario& s, std::string_view v, const std::string& key) { s.*member = parse_double(v, key); },
            [member](const Scenario& s) -> std::optional<std::string> {
                if (!(s.*member))
                    return std::nullopt;
                return format_number(*(s.*member));
            }};
}

template <typename Int>
Field integer(std::string section, std::string name, Int Scenario::*member) {
    return {std::move(section), std::move(name),
            [member](Scenario& s, std::string_view v, const std::string& key) { s.*member = parse_integer<Int>(v, key); },
            [member](const Scenario& s) -> std::optional<std::string> { return format_integer(s.*member); }};
}

Field text(std::string section, std::string name, std::string Scenario::*member) {
    return {std::move(section), std::move(name),
            [member](Scenario& s, std::string_view v, const std::string&) { s.*member = std::string(v); },
            [member](const Scenario& s) -> std::optional<std::string> { return s.*member; }};
}

Field real_list(std::string section, std::string name, std::vector<double> Scenario::*member) {
    return {std::move(section), std::move(name),
            [member](Scenario& s, std::string_view v, const std::string& key) {
                std::vector<double> values;
                if (!trim(v).empty())
                    for (auto item : split(v, ','))
                        values.push_back(parse_double(item, key));
                s.*member = std::move(values);
            },
            [member](const Scenario& s) -> std::optional<std::string> {
                std::string out;
                for (std::size_t i = 0; i < (s.*member).size(); ++i)
                    out += (i ? ", " : "") + format_number((s.*member)[i]);
                return out;
            }};
}

Field mode_list() {
    Field f{"basis", "modes",
            [](Scenario& s, std::string_view v, const std::string& key) {
                s.modes.clear();
                if (trim(v).empty())
                    return;
                for (auto item : split(v, ';')) {
                    if (item.empty())
                        continue;
                    std::vector<std::string_view> parts;
                    for (auto p : split(item, ' '))
                        if (!p.empty())
                            parts.push_back(p);
                    if (parts.size() != 3)
                        throw ConfigError("each mode is 'm n offset_hz', got '" + std::string(item) + "'", key);
                    s.modes.push_back({parse_integer<int>(parts[0], key), parse_integer<int>(parts[1], key),
                                       parse_double(parts[2], key)});
                }
            },
            [](const Scenario& s) -> std::optional<std::string> {
                std::string out;
                for (std::size_t i = 0; i < s.modes.size(); ++i) {
                    const auto& m = s.modes[i];
                    out += (i ? "; " : "") + format_integer(m.m) + " " + format_integer(m.n) + " " +
                           format_number(m.frequency_offset_hz);
                }
                return out;
            }};
    f.required = true;
    return f;
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        using S = Scenario;
        return std::vector<Field>{
            real("cavity", "length_mm", &S::cavity_length_mm),
            real("cavity", "mirror_roc_mm", &S::mirror_roc_mm),
            real("cavity", "input_transmission", &S::input_transmission),
            real("cavity", "output_transmission", &S::output_transmission),
            real("cavity", "intracavity_loss", &S::intracavity_loss),
            optional_real("cavity", "finesse", &S::finesse),

            real("basis", "signal_wavelength_nm", &S::signal_wavelength_nm),
            optional_real("basis", "signal_waist_um", &S::signal_waist_um),
            real("basis", "pump_waist_ratio", &S::pump_waist_ratio),
            mode_list(),

            real("pump", "power_mw", &S::pump_power_mw),
            real("pump", "phase_rad", &S::pump_phase_rad),
            real("pump", "threshold_mw", &S::threshold_mw),
            optional_real("pump", "secondary_threshold_mw", &S::secondary_threshold_mw),
            real("pump", "wavelength_nm", &S::pump_wavelength_nm),

            real("detection", "efficiency", &S::detection_efficiency),
            real("detection", "visibility", &S::visibility),
            real("detection", "lo_power_mw", &S::lo_power_mw),
            real("detection", "bright_power_mw", &S::bright_power_mw),

            text("phasematch", "coefficients", &S::coefficients),
            real("phasematch", "nominal_temperature_k", &S::nominal_temperature_k),
            real("phasematch", "temperature_k", &S::crystal_temperature_k),
            real("phasematch", "crystal_length_mm", &S::crystal_length_mm),
            optional_real("phasematch", "poling_period_um", &S::poling_period_um),
            integer("phasematch", "transverse_order_difference", &S::transverse_order_difference),
            real("phasematch", "path_asymmetry_nm", &S::path_asymmetry_nm),
            real("phasematch", "search_min_nm", &S::search_min_nm),

            real("lock", "pump_power_mw", &S::lock_pump_power_mw),
            real("lock", "seed_power_mw", &S::lock_seed_power_mw),
            real("lock", "offset_phase_rad", &S::lock_offset_phase_rad),
            real("lock", "doubling_efficiency_per_w", &S::doubling_efficiency_per_w),
            real("lock", "phase_noise_rad", &S::lock_phase_noise_rad),
            real("lock", "sigma", &S::lock_sigma),

            real("sweep", "freq_start_hz", &S::freq_start_hz),
            real("sweep", "freq_stop_hz", &S::freq_stop_hz),
            integer("sweep", "freq_points", &S::freq_points),
            real_list("sweep", "power_factors", &S::power_factors),
            real("sweep", "phase_start_rad", &S::phase_start_rad),
            real("sweep", "phase_stop_rad", &S::phase_stop_rad),
            integer("sweep", "phase_points", &S::phase_points),
            real("sweep", "temperature_span_k", &S::temperature_span_k),
            integer("sweep", "temperature_points", &S::temperature_points),

            real("sde", "dt_divisor", &S::dt_divisor),
            integer("sde", "segment_length", &S::segment_length),
            integer("sde", "ensemble", &S::ensemble),
            integer("sde", "seed", &S::seed),
            text("sde", "quadrature", &S::quadrature),
        };
    }();
    return table;
}

void require(bool ok, const char* key, const std::string& message) {
    if (!ok)
        throw ConfigError(message, key);
}

std::vector<double> linear_grid(double start, double stop, std::size_t points) {
    std::vector<double> out(points);
    for (std::size_t i = 0; i < points; ++i)
        out[i] = points == 1 ? start : start + (stop - start) * static_cast<double>(i) / static_cast<double>(points - 1);
    return out;
}

} // namespace

std::string format_number(double value) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, end);
}

void Scenario::validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    auto fraction = [](double v) { return std::isfinite(v) && v > 0.0 && v <= 1.0; };

    require(positive(cavity_length_mm), "cavity.length_mm", "must be positive");
    require(positive(mirror_roc_mm), "cavity.mirror_roc_mm", "must be positive");
    require(cavity_length_mm < mirror_roc_mm, "cavity.length_mm", "cavity outside stability range (length >= radius)");
    cavity_params().validate(finesse);

    require(positive(signal_wavelength_nm), "basis.signal_wavelength_nm", "must be positive");
    require(!signal_waist_um || positive(*signal_waist_um), "basis.signal_waist_um", "must be positive");
    require(positive(pump_waist_ratio), "basis.pump_waist_ratio", "must be positive");
    require(!modes.empty(), "basis.modes", "mode basis is empty");
    std::set<std::pair<std::pair<int, int>, double>> seen;
    for (const auto& m : modes) {
        require(m.m >= 0 && m.n >= 0, "basis.modes", "mode indices must be non-negative");
        require(std::isfinite(m.frequency_offset_hz), "basis.modes", "frequency offset must be finite");
        require(seen.insert({{m.m, m.n}, m.frequency_offset_hz}).second, "basis.modes", "duplicate mode");
    }

    require(std::isfinite(pump_power_mw) && pump_power_mw >= 0.0, "pump.power_mw", "must be non-negative");
    require(std::isfinite(pump_phase_rad), "pump.phase_rad", "must be finite");
    require(positive(threshold_mw), "pump.threshold_mw", "must be positive");
    require(!secondary_threshold_mw || positive(*secondary_threshold_mw), "pump.secondary_threshold_mw",
            "must be positive");
    require(positive(pump_wavelength_nm), "pump.wavelength_nm", "must be positive");

    require(fraction(detection_efficiency), "detection.efficiency", "must be in (0, 1]");
    require(fraction(visibility), "detection.visibility", "must be in (0, 1]");
    require(positive(lo_power_mw), "detection.lo_power_mw", "must be positive");
    require(std::isfinite(bright_power_mw) && bright_power_mw >= 0.0, "detection.bright_power_mw",
            "must be non-negative");

    require(!coefficients.empty(), "phasematch.coefficients", "must name a coefficient file");
    require(positive(nominal_temperature_k), "phasematch.nominal_temperature_k", "must be positive");
    require(positive(crystal_temperature_k), "phasematch.temperature_k", "must be positive");
    require(positive(crystal_length_mm), "phasematch.crystal_length_mm", "must be positive");
    require(!poling_period_um || positive(*poling_period_um), "phasematch.poling_period_um", "must be positive");
    require(std::isfinite(path_asymmetry_nm), "phasematch.path_asymmetry_nm", "must be finite");
    require(positive(search_min_nm) && search_min_nm < 2.0 * pump_wavelength_nm, "phasematch.search_min_nm",
            "must lie below the degenerate wavelength");

    require(std::isfinite(lock_pump_power_mw) && lock_pump_power_mw >= 0.0, "lock.pump_power_mw", "must be non-negative");
    require(std::isfinite(lock_seed_power_mw) && lock_seed_power_mw >= 0.0, "lock.seed_power_mw", "must be non-negative");
    require(std::isfinite(lock_offset_phase_rad), "lock.offset_phase_rad", "must be finite");
    require(std::isfinite(doubling_efficiency_per_w) && doubling_efficiency_per_w >= 0.0,
            "lock.doubling_efficiency_per_w", "must be non-negative");
    require(std::isfinite(lock_phase_noise_rad), "lock.phase_noise_rad", "must be finite");
    require(lock_sigma >= 0.0 && lock_sigma < 1.0, "lock.sigma", "must be in [0, 1)");

    require(freq_points >= 1, "sweep.freq_points", "grid is empty");
    require(std::isfinite(freq_start_hz) && freq_start_hz >= 0.0, "sweep.freq_start_hz", "must be non-negative");
    require(std::isfinite(freq_stop_hz) && (freq_points == 1 || freq_stop_hz > freq_start_hz), "sweep.freq_stop_hz",
            "grid must be increasing");
    require(!power_factors.empty(), "sweep.power_factors", "grid is empty");
    for (std::size_t i = 0; i < power_factors.size(); ++i) {
        require(std::isfinite(power_factors[i]) && power_factors[i] >= 0.0, "sweep.power_factors",
                "factors must be non-negative");
        require(i == 0 || power_factors[i] > power_factors[i - 1], "sweep.power_factors", "grid must be increasing");
    }
    require(phase_points >= 1, "sweep.phase_points", "grid is empty");
    require(std::isfinite(phase_start_rad), "sweep.phase_start_rad", "must be finite");
    require(std::isfinite(phase_stop_rad) && (phase_points == 1 || phase_stop_rad > phase_start_rad),
            "sweep.phase_stop_rad", "grid must be increasing");
    require(std::isfinite(temperature_span_k) && temperature_span_k >= 0.0, "sweep.temperature_span_k",
            "must be non-negative");
    require(temperature_points >= 1, "sweep.temperature_points", "grid is empty");
    require(temperature_points == 1 || temperature_span_k > 0.0, "sweep.temperature_span_k",
            "grid must be increasing");

    require(std::isfinite(dt_divisor) && dt_divisor >= 10.0, "sde.dt_divisor",
            "must be at least 10 (integrator stability)");
    require(segment_length >= 16 && (segment_length & (segment_length - 1)) == 0, "sde.segment_length",
            "must be a power of two >= 16");
    require(ensemble >= 1, "sde.ensemble", "must be at least 1");
    require(quadrature == "squeezed" || quadrature == "antisqueezed", "sde.quadrature",
            "must be 'squeezed' or 'antisqueezed'");
}

CavityGeometry Scenario::cavity_geometry() const {
    return {cavity_length_mm * 1e-3, mirror_roc_mm * 1e-3};
}

CavityParams Scenario::cavity_params() const {
    return CavityParams::from_geometry(cavity_geometry(), input_transmission, output_transmission, intracavity_loss);
}

ModeBasis Scenario::basis() const {
    ModeBasis basis;
    BeamGeometry signal;
    signal.wavelength = signal_wavelength_nm * 1e-9;
    signal.waist_radius = signal_waist_um ? *signal_waist_um * 1e-6 : cavity_waist(cavity_geometry(), signal.wavelength);
    for (const auto& m : modes)
        basis.modes.push_back({m.m, m.n, signal, m.frequency_offset_hz});
    basis.pump.geometry.wavelength = pump_wavelength_nm * 1e-9;
    basis.pump.geometry.waist_radius = signal.waist_radius * pump_waist_ratio;
    return basis;
}

PumpDrive Scenario::pump() const {
    return {pump_power_mw * 1e-3, pump_phase_rad, threshold_mw * 1e-3, pump_wavelength_nm * 1e-9};
}

LockScenario Scenario::lock() const {
    return {lock_pump_power_mw * 1e-3, lock_seed_power_mw * 1e-3, lock_offset_phase_rad, doubling_efficiency_per_w,
            lock_phase_noise_rad};
}

std::vector<double> Scenario::frequency_grid() const {
    return linear_grid(freq_start_hz, freq_stop_hz, freq_points);
}

std::vector<double> Scenario::phase_grid() const {
    return linear_grid(phase_start_rad, phase_stop_rad, phase_points);
}

Scenario parse_scenario(std::istream& in) {
    std::map<std::string, const Field*> index;
    for (const auto& f : fields())
        index[f.path()] = &f;

    Scenario s;
    std::set<std::string> seen;
    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos)
            view = view.substr(0, hash);
        view = trim(view);
        if (view.empty())
            continue;
        if (view.front() == '[') {
            if (view.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = std::string(trim(view.substr(1, view.size() - 2)));
            continue;
        }
        const auto eq = view.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key(trim(view.substr(0, eq)));
        if (key.find('.') == std::string::npos) {
            if (section.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": key outside any section", key);
            key = section + "." + key;
        }
        const auto it = index.find(key);
        if (it == index.end())
            throw ConfigError("unknown key", key);
        if (!seen.insert(key).second)
            throw ConfigError("key given twice", key);
        it->second->read(s, trim(view.substr(eq + 1)), key);
    }
    for (const auto& f : fields())
        if (f.required && !seen.count(f.path()))
            throw ConfigError("missing required key", f.path());
    s.validate();
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open scenario file '" + path.string() + "'", "scenario");
    return parse_scenario(in);
}

std::string serialize_scenario(const Scenario& scenario) {
    std::ostringstream out;
    std::string section;
    for (const auto& f : fields()) {
        const auto value = f.write(scenario);
        if (!value)
            continue;
        if (f.section != section) {
            out << (section.empty() ? "" : "\n") << '[' << f.section << "]\n";
            section = f.section;
        }
        out << f.name << " = " << *value << '\n';
    }
    return out.str();
}

} // namespace opo
