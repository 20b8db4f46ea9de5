#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hamlet/trace.hpp"

namespace hamlet {

// A record-setting observation: best accuracy y first reached at time x.
struct EnvelopePoint {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const EnvelopePoint&, const EnvelopePoint&) = default;
};

// y = a * atan(b * (x + c)) + d, with a >= 0 and b >= 0 so the curve never decreases.
struct CurveParams {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;

    double operator()(double x) const;
    friend bool operator==(const CurveParams&, const CurveParams&) = default;
};

struct FittedCurve {
    CurveParams params;
    std::size_t n_points = 0;
    double residual = 0.0;  // RMS over the fitted points; 0 in fallback mode
    bool fallback = true;
    double level = 0.0;     // constant prediction when fallback is set

    static FittedCurve constant(double level, std::size_t n_points = 0);
};

// Strict running-maximum filter: keeps exactly the events whose accuracy
// exceeds every earlier accuracy. Input must be sorted by t.
std::vector<EnvelopePoint> monotone_envelope(std::span<const TraceEvent> events);

// Envelope-on-envelope; used to check idempotence.
std::vector<EnvelopePoint> monotone_envelope(std::span<const EnvelopePoint> points);

// Solver knobs. The defaults are the production values; tests may tighten them.
struct FitOptions {
    std::size_t min_points = 4;
    std::size_t max_iterations = 10000;
    double step_tolerance = 1e-8;
    double cost_tolerance = 1e-8;
};

// Bounded Levenberg-Marquardt fit with five starting points; the start with
// the lowest residual wins. Fewer than `min_points` points, or no start
// converging, yields a constant curve at the last envelope y (0 when empty).
// Throws DomainError on non-finite coordinates.
FittedCurve fit_arctan(std::span<const EnvelopePoint> envelope, const FitOptions& options = {});

// Model (or fallback constant) at x, clamped to [0, 1].
double predict(const FittedCurve& curve, double x);

// Accuracy expected if the whole remaining budget went to this arm.
inline double extrapolate_reward(const FittedCurve& curve, double t_x, double remaining) {
    return predict(curve, t_x + remaining);
}

// RMS of model predictions against the points.
double rms_residual(const CurveParams& params, std::span<const EnvelopePoint> points);

} // namespace hamlet
