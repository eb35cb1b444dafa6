#include "opo/phasematch.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "opo/constants.hpp"
#include "opo/error.hpp"

namespace opo {

namespace {

constexpr double kMismatchTolerance = 1e-3;  // rad/m

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string format_bound(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << v;
    return os.str();
}

} // namespace

double SellmeierModel::thermo_optic_coefficient(double wavelength) const {
    const double um = wavelength * 1e6;
    return thermo[0] + thermo[1] / um + thermo[2] / (um * um) + thermo[3] / (um * um * um);
}

SellmeierModel parse_sellmeier(std::istream& in) {
    std::map<std::string, std::string> values;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(number) + ": expected key = value");
        values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto number_of = [&](const std::string& key) {
        const auto it = values.find(key);
        if (it == values.end())
            throw ConfigError("missing coefficient", key);
        std::istringstream is(it->second);
        is.imbue(std::locale::classic());
        double v = 0;
        if (!(is >> v))
            throw ConfigError("not a number: " + it->second, key);
        return v;
    };
    SellmeierModel m;
    m.name = values.count("name") ? values["name"] : "unnamed";
    m.a = number_of("A");
    m.b1 = number_of("B1");
    m.c1 = number_of("C1");
    m.b2 = number_of("B2");
    m.c2 = number_of("C2");
    m.d = number_of("D");
    for (int i = 0; i < 4; ++i)
        m.thermo[static_cast<std::size_t>(i)] = number_of("t" + std::to_string(i));
    m.reference_temperature = number_of("reference_temperature_k");
    m.wavelength_min = number_of("wavelength_min_um") * 1e-6;
    m.wavelength_max = number_of("wavelength_max_um") * 1e-6;
    m.temperature_min = number_of("temperature_min_k");
    m.temperature_max = number_of("temperature_max_k");
    if (!(m.wavelength_min < m.wavelength_max) || !(m.temperature_min < m.temperature_max))
        throw ConfigError("validity ranges must be non-empty");
    return m;
}

SellmeierModel load_sellmeier(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open coefficient file " + path.string(), "phasematch.coefficients");
    return parse_sellmeier(in);
}

double refractive_index(const SellmeierModel& model, double wavelength, double temperature) {
    if (wavelength < model.wavelength_min)
        throw std::out_of_range("wavelength below Sellmeier validity bound " + format_bound(model.wavelength_min) + " m");
    if (wavelength > model.wavelength_max)
        throw std::out_of_range("wavelength above Sellmeier validity bound " + format_bound(model.wavelength_max) + " m");
    if (temperature < model.temperature_min)
        throw std::out_of_range("temperature below validity bound " + format_bound(model.temperature_min) + " K");
    if (temperature > model.temperature_max)
        throw std::out_of_range("temperature above validity bound " + format_bound(model.temperature_max) + " K");
    const double l2 = wavelength * wavelength * 1e12;
    const double n2 = model.a + model.b1 / (1.0 - model.c1 / l2) + model.b2 / (1.0 - model.c2 / l2) - model.d * l2;
    return std::sqrt(n2) + model.thermo_optic_coefficient(wavelength) * (temperature - model.reference_temperature);
}

double calibrate_poling_period(const SellmeierModel& model, double pump_wavelength, double temperature) {
    const double np = refractive_index(model, pump_wavelength, temperature);
    const double ns = refractive_index(model, 2.0 * pump_wavelength, temperature);
    if (!(np > ns))
        throw PhysicsError("calibrate_poling_period: no first-order quasi-phase-matching (n_p <= n_s)");
    return pump_wavelength / (np - ns);
}

double idler_wavelength(double pump_wavelength, double signal_wavelength) {
    return 1.0 / (1.0 / pump_wavelength - 1.0 / signal_wavelength);
}

double qpm_mismatch(const SellmeierModel& model, const PolingSpec& poling, double pump_wavelength,
                    double signal_wavelength, double idler_wavelength, double gouy_correction) {
    const double inv_p = 1.0 / pump_wavelength;
    const double balance = 1.0 / signal_wavelength + 1.0 / idler_wavelength;
    if (std::abs(balance - inv_p) > 1e-6 * inv_p)
        throw std::invalid_argument("qpm_mismatch: signal and idler violate energy conservation");
    if (!(poling.poling_period > 0.0))
        throw std::invalid_argument("qpm_mismatch: poling period must be positive");
    const double t = poling.temperature;
    const double np = refractive_index(model, pump_wavelength, t);
    const double ns = refractive_index(model, signal_wavelength, t);
    const double ni = refractive_index(model, idler_wavelength, t);
    const double two_pi = 2.0 * constants::pi;
    return two_pi * (np / pump_wavelength - ns / signal_wavelength - ni / idler_wavelength) -
           two_pi / poling.poling_period + gouy_correction;
}

SignalIdlerPair solve_signal_idler(const SellmeierModel& model, const PolingSpec& poling,
                                   const PhaseMatchConstraints& constraints) {
    const double lp = constraints.pump_wavelength;
    const double degenerate = 2.0 * lp;
    auto mismatch = [&](double signal) {
        const double idler = signal == degenerate ? degenerate : idler_wavelength(lp, signal);
        return qpm_mismatch(model, poling, lp, signal, idler, constraints.gouy_correction);
    };

    const double at_degeneracy = mismatch(degenerate);
    if (std::abs(at_degeneracy) < kMismatchTolerance)
        return {degenerate, degenerate, at_degeneracy};

    double lo = constraints.search_min, hi = degenerate;
    double f_lo = mismatch(lo);
    if ((f_lo > 0.0) == (at_degeneracy > 0.0))
        throw PhysicsError("no phase-matched pair in range");
    double signal = lo, residual = f_lo;
    for (int it = 0; it < 400; ++it) {
        signal = 0.5 * (lo + hi);
        residual = mismatch(signal);
        if (std::abs(residual) < kMismatchTolerance)
            break;
        if ((residual > 0.0) == (f_lo > 0.0)) {
            lo = signal;
            f_lo = residual;
        } else {
            hi = signal;
        }
    }
    if (std::abs(residual) >= kMismatchTolerance)
        throw PhysicsError("solve_signal_idler: bisection stalled at |dk| = " + std::to_string(std::abs(residual)));
    return {signal, idler_wavelength(lp, signal), residual};
}

double degeneracy_temperature(const SellmeierModel& model, const PolingSpec& poling, double pump_wavelength) {
    const double degenerate = 2.0 * pump_wavelength;
    auto mismatch = [&](double temperature) {
        PolingSpec p = poling;
        p.temperature = temperature;
        return qpm_mismatch(model, p, pump_wavelength, degenerate, degenerate);
    };
    double lo = model.temperature_min, hi = model.temperature_max;
    double f_lo = mismatch(lo);
    const double f_hi = mismatch(hi);
    if ((f_lo > 0.0) == (f_hi > 0.0))
        throw PhysicsError("no degeneracy temperature inside the model validity range");
    double t = lo;
    for (int it = 0; it < 200; ++it) {
        t = 0.5 * (lo + hi);
        const double f = mismatch(t);
        if (std::abs(f) < 0.1 * kMismatchTolerance && hi - lo < 0.01)
            break;
        if ((f > 0.0) == (f_lo > 0.0)) {
            lo = t;
            f_lo = f;
        } else {
            hi = t;
        }
    }
    return t;
}

std::vector<TuningPoint> tuning_curve(const SellmeierModel& model, PolingSpec poling,
                                      const PhaseMatchConstraints& constraints,
                                      std::span<const double> temperatures) {
    std::vector<TuningPoint> out;
    out.reserve(temperatures.size());
    for (double t : temperatures) {
        poling.temperature = t;
        try {
            const auto pair = solve_signal_idler(model, poling, constraints);
            out.push_back({t, pair.signal, pair.idler});
        } catch (const PhysicsError&) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            out.push_back({t, nan, nan});
        }
    }
    return out;
}

} // namespace opo
