#include "becmode/order_parameter.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "becmode/csv.hpp"
#include "becmode/errors.hpp"

namespace becmode::order_parameter {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Running integral of a population at time t, continuing the per-step
// trapezoid sums from the nearest sample below t.
double cumulative_at(const std::vector<double>& tau, const std::vector<double>& n, const std::vector<double>& cum,
                     double t)
{
    auto it = std::upper_bound(tau.begin(), tau.end(), t);
    if (it == tau.begin())
        return 0.0;
    std::size_t i = static_cast<std::size_t>(it - tau.begin()) - 1;
    if (i + 1 >= tau.size())
        return cum.back();
    const double s = (t - tau[i]) / (tau[i + 1] - tau[i]);
    const double nt = n[i] + s * (n[i + 1] - n[i]);
    return cum[i] + 0.5 * (t - tau[i]) * (n[i] + nt);
}

// Parabolic vertex through the three samples around a peak.
double refine(const std::vector<double>& ac, std::size_t k)
{
    double lag = static_cast<double>(k);
    if (k > 0 && k + 1 < ac.size()) {
        const double a = ac[k - 1];
        const double b = ac[k];
        const double c = ac[k + 1];
        const double den = a - 2.0 * b + c;
        if (den < 0.0)
            lag += 0.5 * (a - c) / den;
    }
    return lag;
}

}  // namespace

void EtaCurve::summarize()
{
    critical_ratio.reset();
    max_jump = 0.0;
    max_jump_at = points.empty() ? 0.0 : points.front().ratio;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const double a = points[i].eta;
        const double b = points[i + 1].eta;
        if (!std::isfinite(a) || !std::isfinite(b))
            continue;
        const double j = std::abs(b - a);
        if (j > max_jump) {
            max_jump = j;
            max_jump_at = points[i].ratio;
        }
        if (!critical_ratio && (a < 0.0) != (b < 0.0))
            critical_ratio = 0.5 * (points[i].ratio + points[i + 1].ratio);
    }
}

std::optional<double> detect_period(const std::vector<double>& series, double spacing)
{
    const std::size_t n = series.size();
    if (n < 4)
        return std::nullopt;
    double mean = 0.0;
    for (double x : series)
        mean += x;
    mean /= static_cast<double>(n);
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i)
        d[i] = series[i] - mean;

    const std::size_t max_lag = n / 2;
    std::vector<double> ac(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i + k < n; ++i)
            s += d[i] * d[i + k];
        ac[k] = s;
    }
    if (!(ac[0] > 0.0))
        return std::nullopt;
    for (double& a : ac)
        a /= ac[0];

    std::size_t zero = 1;
    while (zero <= max_lag && ac[zero] >= 0.0)
        ++zero;
    if (zero >= max_lag)
        return std::nullopt;
    std::size_t k = zero;
    for (std::size_t i = zero; i <= max_lag; ++i)
        if (ac[i] > ac[k])
            k = i;
    if (ac[k] < kMinCorrelation)
        return std::nullopt;
    const double lag = refine(ac, k);

    // The peak near the largest multiple of the first period pins the
    // period down more tightly; the bias (n - k) / n is undone for the test.
    for (auto m = static_cast<std::size_t>(static_cast<double>(max_lag) / lag); m >= 2; --m) {
        const double centre = lag * static_cast<double>(m);
        const auto lo = static_cast<std::size_t>(std::max(1.0, std::ceil(centre - 0.25 * lag)));
        const auto hi = std::min(max_lag - 1, static_cast<std::size_t>(std::floor(centre + 0.25 * lag)));
        if (lo > hi)
            continue;
        std::size_t km = lo;
        for (std::size_t i = lo; i <= hi; ++i)
            if (ac[i] > ac[km])
                km = i;
        const double unbiased = ac[km] * static_cast<double>(n) / static_cast<double>(n - km);
        if (km > lo && km < hi && unbiased >= kMinCorrelation)
            return refine(ac, km) / static_cast<double>(m) * spacing;
    }
    return lag * spacing;
}

EtaPoint eta_from_trajectory(const twomode::TwoModeTrajectory& traj, double ratio, double delta)
{
    if (traj.size() < 2)
        throw InsufficientHorizonError("trajectory needs at least two samples");
    EtaPoint p;
    p.ratio = ratio;
    p.delta = delta;
    const auto [lo, hi] = std::minmax_element(traj.n0.begin(), traj.n0.end());
    if (*hi - *lo < 1e-14) {
        p.eta = traj.n0.front() - traj.np.front();
        p.flag = "constant";
        p.period_estimate = kNaN;
        return p;
    }
    const double t0 = traj.tau.front();
    const double horizon = traj.tau.back() - t0;
    const double spacing = traj.tau[1] - traj.tau[0];
    // the last sample may sit closer than the stride; leave it out of the
    // uniform series
    std::vector<double> uniform(traj.n0);
    if (traj.size() > 2 && std::abs((traj.tau.back() - traj.tau[traj.size() - 2]) - spacing) > 1e-9 * spacing)
        uniform.pop_back();

    const std::optional<double> period = detect_period(uniform, spacing);
    double t_avg = horizon;
    if (period && *period > 0.0 && *period <= horizon) {
        p.cycles_used = static_cast<int>(std::floor(horizon / *period + 1e-9));
        p.period_estimate = *period;
        t_avg = p.cycles_used * *period;
    } else {
        p.flag = "full_horizon";
        p.period_estimate = kNaN;
    }
    const double i0 = cumulative_at(traj.tau, traj.n0, traj.cum_n0, t0 + t_avg);
    const double ip = cumulative_at(traj.tau, traj.np, traj.cum_np, t0 + t_avg);
    p.eta = std::clamp((i0 - ip) / t_avg, -1.0, 1.0);
    return p;
}

std::vector<double> make_grid(double start, double stop, double step)
{
    if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step))
        throw ParameterError("grid bounds must be finite");
    if (!(step > 0.0))
        throw ParameterError(fmt::format("grid step must be > 0 (got {})", step));
    if (stop < start)
        throw ParameterError(fmt::format("grid stop {} is below start {}", stop, start));
    const auto n = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(n + 1));
    for (long long i = 0; i <= n; ++i)
        g.push_back(start + static_cast<double>(i) * step);
    return g;
}

std::vector<EtaCurve> sweep(double g0, double lambda, const std::vector<double>& deltas,
                            const std::vector<double>& ratio_grid, const SweepOptions& options)
{
    if (deltas.empty())
        throw ParameterError("sweep needs at least one detuning");
    if (ratio_grid.empty())
        throw ParameterError("sweep needs a non-empty ratio grid");
    if (!std::is_sorted(ratio_grid.begin(), ratio_grid.end()))
        throw ParameterError("ratio grid must be sorted ascending");
    if (ratio_grid.front() < 0.0)
        throw ParameterError("ratios a/a0 must be >= 0");
    if (options.threads < 1)
        throw ParameterError("threads must be >= 1");

    const twomode::DriveParams base = twomode::make_drive(g0, lambda, 0.0, 0.0, options.excited, options.solve);
    const std::size_t nr = ratio_grid.size();
    const std::size_t total = deltas.size() * nr;
    std::vector<EtaPoint> results(total);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;

    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= total)
                return;
            const double delta = deltas[i / nr];
            const double ratio = ratio_grid[i % nr];
            twomode::DriveParams d = base;
            d.delta = delta;
            d.ratio = ratio;
            try {
                const auto traj = twomode::integrate(d, options.integrate);
                results[i] = eta_from_trajectory(traj, ratio, delta);
            } catch (const Error& e) {
                EtaPoint p;
                p.ratio = ratio;
                p.delta = delta;
                p.eta = kNaN;
                p.period_estimate = kNaN;
                p.flag = std::string("failed: ") + e.what();
                results[i] = p;
            }
            const std::size_t n = done.fetch_add(1) + 1;
            if (options.progress) {
                std::lock_guard lock(progress_mutex);
                options.progress(n, total);
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const int extra = std::min<int>(options.threads, static_cast<int>(total)) - 1;
        for (int t = 0; t < extra; ++t)
            pool.emplace_back(work);
        work();
    }

    std::vector<EtaCurve> curves;
    curves.reserve(deltas.size());
    for (std::size_t c = 0; c < deltas.size(); ++c) {
        EtaCurve curve;
        curve.delta = deltas[c];
        curve.points.assign(results.begin() + static_cast<std::ptrdiff_t>(c * nr),
                            results.begin() + static_cast<std::ptrdiff_t>((c + 1) * nr));
        curve.summarize();
        curves.push_back(std::move(curve));
    }
    return curves;
}

Transition classify_transition(const EtaCurve& curve, double step_threshold)
{
    if (curve.points.size() < static_cast<std::size_t>(kMinPoints))
        throw InsufficientResolutionError(fmt::format("classification needs at least {} points (got {})", kMinPoints,
                                                      curve.points.size()));
    for (std::size_t i = 0; i + 1 < curve.points.size(); ++i) {
        const double h = curve.points[i + 1].ratio - curve.points[i].ratio;
        if (h > kMaxSpacing + 1e-12)
            throw InsufficientResolutionError(
                fmt::format("ratio spacing {:.4g} at {:.4g} exceeds {}", h, curve.points[i].ratio, kMaxSpacing));
    }
    EtaCurve c = curve;
    c.summarize();
    return c.max_jump > step_threshold ? Transition::Step : Transition::Smooth;
}

std::string to_string(Transition t)
{
    return t == Transition::Step ? "step" : "smooth";
}

void write_csv(std::ostream& out, const std::vector<EtaCurve>& curves, const std::vector<std::string>& comments)
{
    csv::write_comments(out, comments);
    out << "delta,ratio,eta,cycles_used,period_estimate,flag\n";
    for (const auto& c : curves)
        for (const auto& p : c.points) {
            std::string flag = p.flag;
            std::replace(flag.begin(), flag.end(), ',', ';');
            std::replace(flag.begin(), flag.end(), '\n', ' ');
            out << csv::number(p.delta) << ',' << csv::number(p.ratio) << ',' << csv::number(p.eta) << ','
                << p.cycles_used << ',' << csv::number(p.period_estimate) << ',' << flag << '\n';
        }
    if (!out)
        throw IoError("failed writing sweep CSV");
}

std::string summary_json(const std::vector<EtaCurve>& curves, double step_threshold)
{
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : curves) {
        nlohmann::ordered_json j;
        j["delta"] = c.delta;
        j["critical_ratio"] = c.critical_ratio ? nlohmann::ordered_json(*c.critical_ratio) : nlohmann::ordered_json();
        j["max_jump"] = c.max_jump;
        j["max_jump_at"] = c.max_jump_at;
        try {
            j["class"] = to_string(classify_transition(c, step_threshold));
        } catch (const InsufficientResolutionError&) {
            j["class"] = "insufficient_resolution";
        }
        double eta_min = 1.0;
        for (const auto& p : c.points)
            if (std::isfinite(p.eta))
                eta_min = std::min(eta_min, p.eta);
        j["eta_min"] = eta_min;
        arr.push_back(j);
    }
    return arr.dump(2);
}

}  // namespace becmode::order_parameter
