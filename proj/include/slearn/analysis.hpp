#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "slearn/csv.hpp"
#include "slearn/matrix.hpp"
#include "slearn/models.hpp"
#include "slearn/network.hpp"

namespace slearn {

// <pi, d>: the almost-sure limit of (1/i) lambda_{k,i}, independent of the
// agent and of the confidence weight.
inline double asymptotic_rate(const PerronVector& pi, const DivergenceVector& d) {
    if (pi.size() != d.size()) throw std::invalid_argument("asymptotic_rate: dimension mismatch");
    for (double v : d)
        if (!std::isfinite(v)) throw std::domain_error("asymptotic_rate: divergence vector not finite");
    return dot(pi, d);
}

// A(t) with entries a(l,k) * M_l(t), where M_l is the LLR moment generating
// function of agent l. Stored with the largest MGF factored out so that
// extreme tilts stay representable; entry(l,k) = scaled(l,k) * exp(log_scale).
struct TiltedMatrix {
    double t = 0.0;
    Matrix scaled;
    double log_scale = 0.0;

    double entry(std::size_t l, std::size_t k) const { return scaled(l, k) * std::exp(log_scale); }
};

template <class Model>
TiltedMatrix tilted_matrix(const CombinationMatrix& a, const Model& model, std::size_t theta0,
                           std::size_t theta, double t) {
    const std::size_t n = a.rows();
    if (model.agent_count() != n)
        throw std::invalid_argument("tilted_matrix: matrix size must match agent count");
    Vector log_m(n);
    double scale = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < n; ++l) {
        log_m[l] = model.log_mgf(l, t, theta0, theta);
        if (!std::isfinite(log_m[l])) throw std::domain_error("tilted_matrix: infinite MGF");
        scale = std::max(scale, log_m[l]);
    }
    TiltedMatrix out;
    out.t = t;
    out.log_scale = scale;
    out.scaled = Matrix(n, n, 0.0);
    for (std::size_t l = 0; l < n; ++l) {
        const double f = std::exp(log_m[l] - scale);
        for (std::size_t k = 0; k < n; ++k) out.scaled(l, k) = a(l, k) * f;
    }
    return out;
}

// Perron-Frobenius data of A(t): the eigenvalue Lambda(t) (kept as a log) and
// the positive vector u(t) solving sum_l a(l,k) M_l(t) u_l = Lambda(t) u_k,
// normalized to max entry 1. This is the left eigen problem of A(t), solved by
// power iteration on the transpose; u(t) is exactly the vector the tilted
// sampler needs.
struct EigenData {
    double log_lambda = 0.0;
    Vector u;
    double residual = 0.0;

    double lambda() const { return std::exp(log_lambda); }
};

inline EigenData log_perron(const TiltedMatrix& tilted, double tol = 1e-13,
                            std::size_t max_iters = 1'000'000) {
    const std::size_t n = tilted.scaled.rows();
    Vector u(n, 1.0);
    double lambda_scaled = 1.0;
    double residual = std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < max_iters; ++it) {
        Vector v = mat_transpose_vec(tilted.scaled, u);
        double vmax = 0.0;
        for (double x : v) vmax = std::max(vmax, x);
        if (!(vmax > 0.0)) throw std::runtime_error("log_perron: matrix is not primitive");
        lambda_scaled = vmax;
        residual = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            residual = std::max(residual, std::fabs(v[k] / (lambda_scaled * u[k]) - 1.0));
        for (std::size_t k = 0; k < n; ++k) u[k] = v[k] / vmax;
        if (residual <= tol) {
            EigenData out;
            out.log_lambda = std::log(lambda_scaled) + tilted.log_scale;
            out.u = std::move(u);
            out.residual = residual;
            return out;
        }
    }
    throw std::runtime_error("log_perron: power iteration did not converge");
}

// log Lambda(t) as a function of the tilt, with a finite-difference
// derivative. This is the cumulant generating function of the log-belief
// ratio increments in the replacement regime.
class SpectralCgf {
public:
    template <class Model>
    SpectralCgf(const CombinationMatrix& a, const Model& model, std::size_t theta0,
                std::size_t theta)
        : a_(a),
          eval_([model, theta0, theta](const CombinationMatrix& m, double t) {
              return log_perron(tilted_matrix(m, model, theta0, theta, t));
          }) {}

    double value(double t) const { return eval_(a_, t).log_lambda; }

    EigenData eigen(double t) const { return eval_(a_, t); }

    double derivative(double t, double step = 1e-5) const {
        return (value(t + step) - value(t - step)) / (2.0 * step);
    }

    const CombinationMatrix& matrix() const { return a_; }

private:
    CombinationMatrix a_;
    std::function<EigenData(const CombinationMatrix&, double)> eval_;
};

struct RatePoint {
    double s = 0.0;
    double value = 0.0;   // I(s)
    double t_star = 0.0;
    bool saturated = false;
};

// Legendre-Fenchel transform I(s) = sup_t { s t - log Lambda(t) }. The sup is
// found by bisection on the derivative, which is monotone because
// log Lambda is convex. Slopes outside the reach of the search window are
// reported at the boundary and flagged as saturated.
class RateFunction {
public:
    explicit RateFunction(SpectralCgf cgf, double t_max = 50.0)
        : cgf_(std::move(cgf)),
          t_max_(t_max),
          slope_lo_(cgf_.derivative(-t_max)),
          slope_hi_(cgf_.derivative(t_max)) {}

    RatePoint at(double s) const {
        RatePoint p;
        p.s = s;
        if (s <= slope_lo_ || s >= slope_hi_) {
            const double tb = (s <= slope_lo_) ? -t_max_ : t_max_;
            p.t_star = tb;
            p.value = s * tb - cgf_.value(tb);
            p.saturated = true;
            // the exact slope boundary is attainable, keep it unflagged
            if (s == slope_lo_ || s == slope_hi_) p.saturated = false;
            return p;
        }
        double lo = -t_max_, hi = t_max_;
        for (int iter = 0; iter < 200 && (hi - lo) > 1e-9; ++iter) {
            const double mid = 0.5 * (lo + hi);
            if (cgf_.derivative(mid) < s)
                lo = mid;
            else
                hi = mid;
        }
        p.t_star = 0.5 * (lo + hi);
        p.value = s * p.t_star - cgf_.value(p.t_star);
        p.saturated = false;
        return p;
    }

    // (log Lambda)'(0), the stationary mean of the increments.
    double mean() const { return cgf_.derivative(0.0); }

    double slope_min() const { return slope_lo_; }
    double slope_max() const { return slope_hi_; }
    double t_max() const { return t_max_; }
    const SpectralCgf& cgf() const { return cgf_; }

private:
    SpectralCgf cgf_;
    double t_max_;
    double slope_lo_, slope_hi_;
};

template <class Model>
RateFunction rate_function(const CombinationMatrix& a, const Model& model, std::size_t theta0,
                           std::size_t theta, double t_max = 50.0) {
    return RateFunction(SpectralCgf(a, model, theta0, theta), t_max);
}

// Endpoints of a real interval; infinities allowed. Interior and closure
// semantics are applied by the infimum routine itself.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
};

struct LdpBounds {
    double lower_exponent = 0.0;  // -inf over the interior of the interval
    double upper_exponent = 0.0;  // -inf over the closure
};

namespace detail {

// inf of I over [lo, hi] using a coarse grid refined by golden-section;
// convexity makes the local refinement global.
inline double infimum_over_closed(const RateFunction& rate, double lo, double hi) {
    const double inf = std::numeric_limits<double>::infinity();
    double wlo = std::max(lo, rate.slope_min());
    double whi = std::min(hi, rate.slope_max());
    if (wlo > whi) {
        // interval entirely in the saturated region; closest endpoint decides
        const double s_edge = (hi < rate.slope_min()) ? hi : lo;
        return std::isfinite(s_edge) ? rate.at(s_edge).value : inf;
    }
    constexpr int grid_points = 33;
    double best_s = wlo, best_v = inf;
    for (int g = 0; g < grid_points; ++g) {
        const double s = wlo + (whi - wlo) * g / (grid_points - 1);
        const double v = rate.at(s).value;
        if (v < best_v) {
            best_v = v;
            best_s = s;
        }
    }
    const double cell = (whi - wlo) / (grid_points - 1);
    double a = std::max(wlo, best_s - cell), b = std::min(whi, best_s + cell);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = rate.at(x1).value, f2 = rate.at(x2).value;
    for (int iter = 0; iter < 80 && (b - a) > 1e-7; ++iter) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = rate.at(x1).value;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = rate.at(x2).value;
        }
    }
    return std::min({best_v, f1, f2});
}

}  // namespace detail

// Exponent bounds for P((1/i) lambda_i in Gamma): lower from the interior
// infimum of I, upper from the closure infimum.
inline LdpBounds ldp_interval_bounds(const RateFunction& rate, Interval gamma) {
    if (gamma.lo > gamma.hi || std::isnan(gamma.lo) || std::isnan(gamma.hi))
        throw std::invalid_argument("ldp_interval_bounds: empty interval");
    LdpBounds out;
    const double closure_inf = detail::infimum_over_closed(rate, gamma.lo, gamma.hi);
    out.upper_exponent = -closure_inf;
    if (gamma.lo == gamma.hi) {
        out.lower_exponent = -std::numeric_limits<double>::infinity();  // empty interior
    } else {
        out.lower_exponent = -closure_inf;  // I is continuous on the working range
    }
    return out;
}

struct ErrorExponent {
    double liminf_exponent = 0.0;  // max over alternatives of inf_{s<0} I_theta(s)
    double limsup_exponent = 0.0;  // max over alternatives of inf_{s<=0} I_theta(s)
    bool identifiable = true;
};

// Exponent bounds for the maximum-likelihood decision error in the
// replacement regime; they do not depend on the agent.
template <class Model>
ErrorExponent error_exponent(const CombinationMatrix& a, const Model& model, std::size_t theta0) {
    ErrorExponent out;
    out.identifiable = is_identifiable(model, theta0);
    double lim_inf = -std::numeric_limits<double>::infinity();
    double lim_sup = -std::numeric_limits<double>::infinity();
    for (std::size_t theta = 0; theta < model.hypotheses().size(); ++theta) {
        if (theta == theta0) continue;
        const RateFunction rate = rate_function(a, model, theta0, theta);
        const LdpBounds bounds = ldp_interval_bounds(rate, Interval{-std::numeric_limits<double>::infinity(), 0.0});
        lim_inf = std::max(lim_inf, -bounds.lower_exponent);
        lim_sup = std::max(lim_sup, -bounds.upper_exponent);
    }
    out.liminf_exponent = lim_inf;
    out.limsup_exponent = lim_sup;
    return out;
}

// CSV schema: s,I,t_star,saturated
inline void write_rate_csv(const std::vector<RatePoint>& points, std::ostream& out) {
    out << "s,I,t_star,saturated\n";
    for (const auto& p : points)
        out << csv::format_double(p.s) << ',' << csv::format_double(p.value) << ','
            << csv::format_double(p.t_star) << ',' << (p.saturated ? 1 : 0) << '\n';
}

}  // namespace slearn
