#include "opo/sde.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>

#include "opo/constants.hpp"
#include "opo/error.hpp"
#include "opo/rng.hpp"

namespace opo {

namespace {

enum Channel : std::uint64_t {
    kNoiseSqueezed = 0,
    kNoiseAnti = 1,
    kEscapeSqueezed = 2,
    kEscapeAnti = 3,
    kDetectX = 4,
    kDetectY = 5,
    kBright = 6,
};

constexpr std::uint64_t kBrightMode = ~std::uint64_t{0};

Trajectory integrate(std::span<const Eigen::Index> indices, std::span<const QuadratureProcess> processes,
                     Eigen::Index basis_size, double decay_rate, double escape_efficiency,
                     const IntegrationSettings& settings) {
    if (!(settings.dt > 0.0) || settings.steps == 0)
        throw std::invalid_argument("simulate: time step and step count must be positive");
    if (settings.dt > (1.0 + 1e-12) / (10.0 * decay_rate))
        throw PhysicsError("simulate: time step exceeds the stability bound tau/(10 gamma)");
    if (!(escape_efficiency > 0.0 && escape_efficiency <= 1.0))
        throw std::invalid_argument("simulate: escape efficiency must lie in (0, 1]");

    const auto modes = static_cast<Eigen::Index>(processes.size());
    const auto steps = static_cast<Eigen::Index>(settings.steps);
    Trajectory traj;
    traj.dt = settings.dt;
    traj.steps = settings.steps;
    traj.rng_seed = settings.seed;
    traj.trajectory_index = settings.trajectory_index;
    traj.basis_size = basis_size;
    traj.supermodes.assign(indices.begin(), indices.end());
    traj.processes.assign(processes.begin(), processes.end());
    traj.escape_efficiency = escape_efficiency;
    traj.x.resize(steps, modes);
    traj.y.resize(steps, modes);
    traj.out_x.resize(steps, modes);
    traj.out_y.resize(steps, modes);

    const double dt = settings.dt;
    const double drive = std::sqrt(2.0 * decay_rate * dt);
    const double keep = std::sqrt(escape_efficiency);
    const double leak = std::sqrt(1.0 - escape_efficiency);

    for (Eigen::Index j = 0; j < modes; ++j) {
        const auto& proc = processes[static_cast<std::size_t>(j)];
        if (!(proc.sigma >= 0.0 && proc.sigma < 1.0))
            throw PhysicsError("simulate: sigma must lie in [0, 1) for a non-oscillating supermode");
        const auto mode_id = static_cast<std::uint64_t>(indices[static_cast<std::size_t>(j)]);
        const auto key = [&](Channel c) {
            return stream_key(settings.seed, settings.trajectory_index, mode_id, c);
        };
        CounterRng noise_s(key(kNoiseSqueezed)), noise_a(key(kNoiseAnti));
        CounterRng vac_s(key(kEscapeSqueezed)), vac_a(key(kEscapeAnti));

        const double as = 1.0 - decay_rate * (1.0 + proc.sigma) * dt;
        const double aa = 1.0 - decay_rate * (1.0 - proc.sigma) * dt;
        // start in the stationary distribution of the discrete process
        double qs = std::sqrt(drive * drive / (1.0 - as * as)) * noise_s.normal();
        double qa = std::sqrt(drive * drive / (1.0 - aa * aa)) * noise_a.normal();
        const double c = std::cos(proc.squeezed_angle), s = std::sin(proc.squeezed_angle);

        for (Eigen::Index t = 0; t < steps; ++t) {
            const double ns = noise_s.normal(), na = noise_a.normal();
            const double qs_next = as * qs + drive * ns;
            const double qa_next = aa * qa + drive * na;
            double os = drive * 0.5 * (qs + qs_next) - ns;
            double oa = drive * 0.5 * (qa + qa_next) - na;
            if (leak > 0.0) {
                os = keep * os + leak * vac_s.normal();
                oa = keep * oa + leak * vac_a.normal();
            }
            traj.x(t, j) = c * qs - s * qa;
            traj.y(t, j) = s * qs + c * qa;
            traj.out_x(t, j) = c * os - s * oa;
            traj.out_y(t, j) = s * os + c * oa;
            qs = qs_next;
            qa = qa_next;
        }
    }
    return traj;
}

} // namespace

double default_time_step(const CavityParams& params) { return 1.0 / (50.0 * params.decay_rate()); }

double max_time_step(const CavityParams& params) { return 1.0 / (10.0 * params.decay_rate()); }

Trajectory simulate_quadratures(std::span<const QuadratureProcess> processes, double decay_rate,
                                double escape_efficiency, const IntegrationSettings& settings) {
    std::vector<Eigen::Index> indices(processes.size());
    for (std::size_t i = 0; i < indices.size(); ++i)
        indices[i] = static_cast<Eigen::Index>(i);
    return integrate(indices, processes, static_cast<Eigen::Index>(processes.size()), decay_rate,
                     escape_efficiency, settings);
}

Trajectory simulate_supermodes(std::span<const Eigen::Index> supermodes, const OperatingPoint& op,
                               const Supermodes& s, const CavityParams& params,
                               const IntegrationSettings& settings) {
    std::vector<QuadratureProcess> processes;
    for (Eigen::Index k : supermodes) {
        const auto spec = quadrature_spectrum(k, s, op, params, 1.0, {});
        if (spec.sigma >= 1.0)
            throw PhysicsError("simulate: supermode " + std::to_string(k + 1) +
                               " is at its threshold (sigma = 1); the linearised process is marginal");
        processes.push_back({spec.sigma, spec.squeezed_quadrature_angle});
    }
    return integrate(supermodes, processes, s.size(), params.decay_rate(), params.escape_efficiency(), settings);
}

Trajectory simulate_trajectory(Eigen::Index k, const OperatingPoint& op, const Supermodes& s,
                               const CavityParams& params, const IntegrationSettings& settings) {
    const Eigen::Index one[] = {k};
    return simulate_supermodes(one, op, s, params, settings);
}

double homodyne_efficiency(double detection_efficiency, double visibility) {
    return detection_efficiency * visibility * visibility;
}

HomodyneRecord homodyne_record(const Trajectory& traj, const LocalOscillator& lo) {
    if (!(lo.power > 0.0))
        throw std::invalid_argument("homodyne_record: local oscillator power must be positive");
    if (!(lo.bright_power >= 0.0))
        throw std::invalid_argument("homodyne_record: bright power must be non-negative");
    if (lo.mode.size() != traj.basis_size)
        throw std::invalid_argument("homodyne_record: LO mode has " + std::to_string(lo.mode.size()) +
                                    " coefficients, basis has " + std::to_string(traj.basis_size));
    if (std::abs(lo.mode.norm() - 1.0) > 1e-10)
        throw std::invalid_argument("homodyne_record: LO mode must have unit norm");
    const double eta = homodyne_efficiency(lo.detection_efficiency, lo.visibility);
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("homodyne_record: detection efficiency times visibility^2 must lie in (0, 1]");

    Eigen::VectorXd weights = lo.mode;
    for (std::size_t j = 0; j < traj.supermodes.size(); ++j)
        weights(traj.supermodes[j]) = 0.0;
    if (weights.cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("homodyne_record: LO overlaps a supermode absent from the trajectory");

    HomodyneRecord rec;
    rec.lo_mode = lo.mode;
    rec.lo_phase = lo.phase;
    rec.lo_power = lo.power;
    rec.bright_power = lo.bright_power;
    rec.efficiency = eta;
    rec.dt = traj.dt;
    rec.samples.assign(traj.steps, 0.0);

    const double keep = std::sqrt(eta), leak = std::sqrt(1.0 - eta);
    const double cx = std::cos(lo.phase), cy = std::sin(lo.phase);
    for (std::size_t j = 0; j < traj.supermodes.size(); ++j) {
        const Eigen::Index k = traj.supermodes[j];
        const double weight = lo.mode(k);
        if (weight == 0.0)
            continue;
        const auto col = static_cast<Eigen::Index>(j);
        const auto mode_id = static_cast<std::uint64_t>(k);
        CounterRng vx(stream_key(traj.rng_seed, traj.trajectory_index, mode_id, kDetectX));
        CounterRng vy(stream_key(traj.rng_seed, traj.trajectory_index, mode_id, kDetectY));
        for (std::size_t t = 0; t < traj.steps; ++t) {
            const auto row = static_cast<Eigen::Index>(t);
            double fx = traj.out_x(row, col), fy = traj.out_y(row, col);
            if (leak > 0.0) {
                fx = keep * fx + leak * vx.normal();
                fy = keep * fy + leak * vy.normal();
            }
            rec.samples[t] += weight * (cx * fx + cy * fy);
        }
    }
    if (lo.bright_power > 0.0) {
        CounterRng bright(stream_key(traj.rng_seed, traj.trajectory_index, kBrightMode, kBright));
        const double amplitude = std::sqrt(lo.bright_power / lo.power);
        for (double& v : rec.samples)
            v += amplitude * bright.normal();
    }
    return rec;
}

NoiseEstimate estimate_psd(std::span<const double> samples, double dt, std::size_t segment_length) {
    if (segment_length < 2)
        throw std::invalid_argument("estimate_psd: segment length must be at least 2");
    if (samples.size() < 2 * segment_length)
        throw std::invalid_argument("estimate_psd: need at least " + std::to_string(2 * segment_length) +
                                    " samples, got " + std::to_string(samples.size()));
    if (!(dt > 0.0))
        throw std::invalid_argument("estimate_psd: sample interval must be positive");

    const std::size_t n = segment_length;
    const std::size_t hop = n / 2;
    const std::size_t bins = n / 2 + 1;
    std::vector<double> window(n);
    double power = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        window[i] = 0.5 * (1.0 - std::cos(2.0 * constants::pi * static_cast<double>(i) / static_cast<double>(n - 1)));
        power += window[i] * window[i];
    }

    Eigen::FFT<double> fft;
    std::vector<double> segment(n);
    std::vector<std::complex<double>> spectrum;
    NoiseEstimate est;
    est.segment_length = n;
    est.psd.assign(bins, 0.0);
    for (std::size_t start = 0; start + n <= samples.size(); start += hop) {
        for (std::size_t i = 0; i < n; ++i)
            segment[i] = window[i] * samples[start + i];
        fft.fwd(spectrum, segment);
        for (std::size_t k = 0; k < bins; ++k)
            est.psd[k] += std::norm(spectrum[k]);
        ++est.n_segments;
    }
    const double norm = 1.0 / (power * static_cast<double>(est.n_segments));

    // neighbouring half-overlapped segments are correlated by rho
    double lag = 0.0;
    for (std::size_t i = 0; i + hop < n; ++i)
        lag += window[i] * window[i + hop];
    const double rho = (lag / power) * (lag / power);
    const double segments = static_cast<double>(est.n_segments);
    const double variance = (1.0 + 2.0 * rho * (segments - 1.0) / segments) / segments;

    est.frequencies.resize(bins);
    est.standard_error.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        est.psd[k] *= norm;
        est.frequencies[k] = static_cast<double>(k) / (static_cast<double>(n) * dt);
        // DC and Nyquist periodogram bins of a real record carry one degree of freedom
        est.standard_error[k] = std::sqrt((k == 0 || 2 * k == n) ? 2.0 * variance : variance);
    }
    return est;
}

NoiseEstimate estimate_psd(const HomodyneRecord& record, std::size_t segment_length) {
    return estimate_psd(record.samples, record.dt, segment_length);
}

NoiseEstimate average_estimates(std::span<const NoiseEstimate> estimates) {
    if (estimates.empty())
        throw std::invalid_argument("average_estimates: nothing to average");
    if (estimates.size() == 1)
        return estimates.front();
    NoiseEstimate out = estimates.front();
    std::fill(out.psd.begin(), out.psd.end(), 0.0);
    std::vector<double> variance(out.psd.size(), 0.0);
    out.n_segments = 0;
    for (const auto& e : estimates) {
        if (e.frequencies != out.frequencies)
            throw std::invalid_argument("average_estimates: estimates have different bins");
        const double weight = static_cast<double>(e.n_segments);
        for (std::size_t k = 0; k < out.psd.size(); ++k) {
            out.psd[k] += weight * e.psd[k];
            variance[k] += weight * weight * e.standard_error[k] * e.standard_error[k];
        }
        out.n_segments += e.n_segments;
    }
    const double total = static_cast<double>(out.n_segments);
    for (std::size_t k = 0; k < out.psd.size(); ++k) {
        out.psd[k] /= total;
        out.standard_error[k] = std::sqrt(variance[k]) / total;
    }
    return out;
}

double shot_noise_correction(double lo_power, double bright_power) {
    if (!(lo_power > 0.0))
        throw std::invalid_argument("shot_noise_correction: LO power must be positive");
    if (!(bright_power >= 0.0))
        throw std::invalid_argument("shot_noise_correction: bright power must be non-negative");
    return (lo_power + bright_power) / lo_power;
}

NoiseEstimate apply_shot_noise_correction(NoiseEstimate estimate, double correction) {
    if (!(correction >= 1.0))
        throw std::invalid_argument("apply_shot_noise_correction: correction factor must be >= 1");
    for (double& v : estimate.psd)
        v /= correction;
    return estimate;
}

std::size_t recommended_segment_length(double sigma, double decay_rate, double dt, double bins_per_width) {
    const double narrowest = decay_rate * (1.0 - sigma);
    const double needed = bins_per_width * 2.0 * constants::pi / (narrowest * dt);
    std::size_t n = 64;
    while (static_cast<double>(n) < needed)
        n *= 2;
    return n;
}

NoiseEstimate ensemble_psd(const EnsembleSpec& spec, const OperatingPoint& op, const Supermodes& s,
                           const CavityParams& params) {
    if (spec.count == 0)
        throw std::invalid_argument("ensemble_psd: ensemble count must be positive");
    std::vector<NoiseEstimate> estimates(spec.count);
    std::vector<std::exception_ptr> errors(spec.count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < spec.count; i = next++) {
            try {
                IntegrationSettings settings = spec.settings;
                settings.trajectory_index = spec.settings.trajectory_index + i;
                const auto traj = simulate_supermodes(spec.supermodes, op, s, params, settings);
                estimates[i] = estimate_psd(homodyne_record(traj, spec.lo), spec.segment_length);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    unsigned threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, spec.count));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker);
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return average_estimates(estimates);
}

} // namespace opo
