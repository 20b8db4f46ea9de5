#include "hamlet/learning_curve.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "hamlet/error.hpp"

namespace hamlet {

double CurveParams::operator()(double x) const { return a * std::atan(b * (x + c)) + d; }

FittedCurve FittedCurve::constant(double level, std::size_t n_points) {
    FittedCurve curve;
    curve.fallback = true;
    curve.level = std::clamp(level, 0.0, 1.0);
    curve.n_points = n_points;
    return curve;
}

std::vector<EnvelopePoint> monotone_envelope(std::span<const TraceEvent> events) {
    std::vector<EnvelopePoint> out;
    for (const auto& e : events) {
        if (out.empty() || e.accuracy > out.back().y) out.push_back({e.t, e.accuracy});
    }
    return out;
}

std::vector<EnvelopePoint> monotone_envelope(std::span<const EnvelopePoint> points) {
    std::vector<EnvelopePoint> out;
    for (const auto& p : points) {
        if (out.empty() || p.y > out.back().y) out.push_back(p);
    }
    return out;
}

double rms_residual(const CurveParams& params, std::span<const EnvelopePoint> points) {
    if (points.empty()) return 0.0;
    double sse = 0.0;
    for (const auto& p : points) {
        const double r = params(p.x) - p.y;
        sse += r * r;
    }
    return std::sqrt(sse / static_cast<double>(points.size()));
}

namespace {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

// Parameters live in a scaled time axis u = x / scale so that b and c are O(1).
struct Problem {
    std::vector<double> u;
    std::vector<double> y;

    double cost(const Vec4& p) const {
        double sse = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double r = p[0] * std::atan(p[1] * (u[i] + p[2])) + p[3] - y[i];
            sse += r * r;
        }
        return sse;
    }

    // Normal equations J^T J and gradient J^T r.
    void linearize(const Vec4& p, Mat4& jtj, Vec4& jtr) const {
        jtj.setZero();
        jtr.setZero();
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double shifted = u[i] + p[2];
            const double arg = p[1] * shifted;
            const double denom = 1.0 + arg * arg;
            const double atn = std::atan(arg);
            Vec4 j;
            j << atn, p[0] * shifted / denom, p[0] * p[1] / denom, 1.0;
            const double r = p[0] * atn + p[3] - y[i];
            jtj.noalias() += j * j.transpose();
            jtr.noalias() += j * r;
        }
    }
};

Vec4 project(Vec4 p) {
    p[0] = std::max(p[0], 0.0);
    p[1] = std::max(p[1], 0.0);
    return p;
}

struct StartResult {
    Vec4 params;
    double cost = std::numeric_limits<double>::infinity();
    bool converged = false;
};

StartResult levenberg_marquardt(const Problem& problem, Vec4 p, const FitOptions& options) {
    constexpr double lambda_max = 1e16;
    p = project(p);
    double cost = problem.cost(p);
    if (!std::isfinite(cost)) return {};
    double lambda = 1e-3;

    Mat4 jtj;
    Vec4 jtr;
    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        if (cost == 0.0) return {p, cost, true};
        problem.linearize(p, jtj, jtr);
        const double diag_floor = 1e-12 * std::max(1.0, jtj.diagonal().maxCoeff());

        bool accepted = false;
        Vec4 candidate;
        double candidate_cost = cost;
        while (lambda <= lambda_max) {
            Mat4 damped = jtj;
            for (int k = 0; k < 4; ++k) damped(k, k) += lambda * std::max(jtj(k, k), diag_floor);
            const Vec4 step = damped.ldlt().solve(-jtr);
            candidate = project(p + step);
            candidate_cost = problem.cost(candidate);
            if (std::isfinite(candidate_cost) && candidate_cost < cost) {
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        // Damping saturated without improvement: a (bounded) stationary point.
        if (!accepted) return {p, cost, true};

        const double step_norm = (candidate - p).norm();
        const double decrease = cost - candidate_cost;
        const double previous = cost;
        p = candidate;
        cost = candidate_cost;
        lambda = std::max(lambda * 0.3, 1e-12);
        if (step_norm <= options.step_tolerance * (p.norm() + options.step_tolerance)) return {p, cost, true};
        if (decrease <= options.cost_tolerance * previous) return {p, cost, true};
    }
    return {p, cost, false};
}

} // namespace

FittedCurve fit_arctan(std::span<const EnvelopePoint> envelope, const FitOptions& options) {
    for (const auto& pt : envelope) {
        if (!std::isfinite(pt.x) || !std::isfinite(pt.y)) throw DomainError("fit_arctan: non-finite envelope point");
    }
    if (envelope.empty()) return FittedCurve::constant(0.0);
    if (envelope.size() < options.min_points) return FittedCurve::constant(envelope.back().y, envelope.size());

    const double scale = std::max(1.0, std::fabs(envelope.back().x));
    Problem problem;
    problem.u.reserve(envelope.size());
    problem.y.reserve(envelope.size());
    double y_sum = 0.0;
    for (const auto& pt : envelope) {
        problem.u.push_back(pt.x / scale);
        problem.y.push_back(pt.y);
        y_sum += pt.y;
    }
    const double u_first = problem.u.front();
    const double u_span = std::max(problem.u.back() - u_first, 1e-12);
    const double y_first = problem.y.front();
    const double y_range = problem.y.back() - y_first;
    const double y_mean = y_sum / static_cast<double>(envelope.size());
    constexpr double pi = 3.14159265358979323846;

    // Base start plus four perturbations: sharper knee (b x10), flatter knee
    // (b x0.1), doubled amplitude anchored at the first value, and a curve
    // anchored at the time origin with b x3.
    const Vec4 base(2.0 * y_range / pi, 1.0 / u_span, -u_first, y_mean);
    const std::array<Vec4, 5> starts = {
        base,
        Vec4(base[0], base[1] * 10.0, base[2], base[3]),
        Vec4(base[0], base[1] * 0.1, base[2], base[3]),
        Vec4(base[0] * 2.0, base[1], base[2], y_first),
        Vec4(base[0], base[1] * 3.0, 0.0, y_first),
    };

    StartResult best;
    for (const auto& start : starts) {
        const auto result = levenberg_marquardt(problem, start, options);
        if (result.converged && result.cost < best.cost) best = result;
    }
    if (!best.converged) return FittedCurve::constant(envelope.back().y, envelope.size());

    FittedCurve curve;
    curve.fallback = false;
    curve.params = CurveParams{best.params[0], best.params[1] / scale, best.params[2] * scale, best.params[3]};
    curve.n_points = envelope.size();
    curve.residual = rms_residual(curve.params, envelope);
    curve.level = envelope.back().y;
    return curve;
}

double predict(const FittedCurve& curve, double x) {
    if (curve.fallback) return curve.level;
    const double y = curve.params(x);
    if (std::isnan(y)) return curve.level;
    return std::clamp(y, 0.0, 1.0);
}

} // namespace hamlet
