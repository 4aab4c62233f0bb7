#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "becmode/twomode.hpp"

namespace becmode::order_parameter {

struct EtaPoint {
    double ratio = 0.0;
    double delta = 0.0;
    double eta = 1.0;
    int cycles_used = 0;
    double period_estimate = 0.0;  // tau units; NaN when no cycle was found
    /// Empty for a cycle-resolved average; "full_horizon", "constant" or
    /// "failed: ..." otherwise.
    std::string flag;
};

struct EtaCurve {
    double delta = 0.0;
    std::vector<EtaPoint> points;
    /// Midpoint of the first adjacent pair where eta changes sign.
    std::optional<double> critical_ratio;
    double max_jump = 0.0;
    double max_jump_at = 0.0;  // lower ratio of the pair with the largest jump

    /// Recomputes critical_ratio and max_jump from points.
    void summarize();
};

/// Autocorrelation peak below this value means "no cycle": fall back to
/// the full-horizon mean.
inline constexpr double kMinCorrelation = 0.5;

/// Period of a uniformly sampled series from the dominant autocorrelation
/// peak after the first zero crossing (must reach kMinCorrelation),
/// sharpened with the peak near its largest multiple inside half the record.
std::optional<double> detect_period(const std::vector<double>& series, double spacing);

/// eta = mean(n0) - mean(np) over the largest whole number of detected
/// cycles. ratio and delta only tag the result.
EtaPoint eta_from_trajectory(const twomode::TwoModeTrajectory& traj, double ratio = 0.0, double delta = 0.0);

struct SweepOptions {
    twomode::IntegrateOptions integrate{1000.0, 1e-3, 100};
    modes::ModeIndex excited = modes::kRadialDipole;
    modes::SolveOptions solve;
    int threads = 1;
    /// Called after each finished point with (done, total); may run on a worker.
    std::function<void(std::size_t, std::size_t)> progress;
};

/// start, start + step, ... up to stop inclusive (index-based, no drift).
std::vector<double> make_grid(double start, double stop, double step);

/// One curve per detuning. Points failing with a library error are kept
/// with flag "failed: ..." and NaN eta. Results do not depend on threads.
std::vector<EtaCurve> sweep(double g0, double lambda, const std::vector<double>& deltas,
                            const std::vector<double>& ratio_grid, const SweepOptions& options = {});

enum class Transition { Smooth, Step };

inline constexpr double kStepThreshold = 0.3;
inline constexpr int kMinPoints = 20;
inline constexpr double kMaxSpacing = 0.01;

/// Step iff max_jump > threshold. Throws InsufficientResolutionError with
/// fewer than 20 points or spacing above 0.01.
Transition classify_transition(const EtaCurve& curve, double step_threshold = kStepThreshold);

std::string to_string(Transition t);

/// CSV `delta,ratio,eta,cycles_used,period_estimate,flag`.
void write_csv(std::ostream& out, const std::vector<EtaCurve>& curves, const std::vector<std::string>& comments = {});

/// JSON array of {delta, critical_ratio, max_jump, class}.
std::string summary_json(const std::vector<EtaCurve>& curves, double step_threshold = kStepThreshold);

}  // namespace becmode::order_parameter
