#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sbp/errors.hpp"

namespace sbp {

enum class NonlinearityKind { power, logpower };

/// Superlinear reaction term f and its antiderivative F.
/// power:    f(t) = |t|^{p-2} t   (hypotheses (f1)-(f4) hold for 4 < p < 6)
/// logpower: f(t) = |t|^2 t ln(1 + |t|)
struct Nonlinearity {
    NonlinearityKind kind = NonlinearityKind::power;
    double p = 5.0;

    static Nonlinearity power(double p) {
        if (!(p > 2.0)) throw InvalidParameter("nonlinearity: power exponent must exceed 2");
        return {NonlinearityKind::power, p};
    }
    static Nonlinearity logpower() { return {NonlinearityKind::logpower, 0.0}; }
};

inline double f_eval(const Nonlinearity& m, double t) {
    const double s = std::abs(t);
    if (s == 0.0) return 0.0;
    switch (m.kind) {
        case NonlinearityKind::power:
            return std::pow(s, m.p - 2.0) * t;
        case NonlinearityKind::logpower:
            return s * s * t * std::log1p(s);
    }
    return 0.0;
}

inline double F_eval(const Nonlinearity& m, double t) {
    const double s = std::abs(t);
    if (s == 0.0) return 0.0;
    switch (m.kind) {
        case NonlinearityKind::power:
            return std::pow(s, m.p) / m.p;
        case NonlinearityKind::logpower: {
            if (s < 1e-3) {
                // series of int_0^s x^3 log(1+x) dx; the closed form cancels badly here
                const double s4 = s * s * s * s;
                return s4 * s * (1.0 / 5.0 - s / 12.0 + s * s / 21.0 - s * s * s / 32.0 +
                                 s * s * s * s / 45.0);
            }
            // by parts: (s^4/4) ln(1+s) - (1/4)(s^4/4 - s^3/3 + s^2/2 - s + ln(1+s))
            const double s2 = s * s;
            return 0.25 * s2 * s2 * std::log1p(s) -
                   0.25 * (0.25 * s2 * s2 - s2 * s / 3.0 + 0.5 * s2 - s + std::log1p(s));
        }
    }
    return 0.0;
}

inline double fprime_eval(const Nonlinearity& m, double t) {
    if (t == 0.0) throw InvalidParameter("fprime_eval: derivative undefined at t = 0");
    const double s = std::abs(t);
    switch (m.kind) {
        case NonlinearityKind::power:
            return (m.p - 1.0) * std::pow(s, m.p - 2.0);
        case NonlinearityKind::logpower:
            return 3.0 * s * s * std::log1p(s) + s * s * s / (1.0 + s);
    }
    return 0.0;
}

/// Coercive confining potential V(x) = v0 + omega |x|^2.
struct Potential {
    double v0 = 1.0;
    double omega = 0.25;

    Potential() = default;
    Potential(double v0_, double omega_) : v0(v0_), omega(omega_) {
        if (!(v0 > 0.0)) throw InvalidParameter("potential: v0 must be positive");
        if (omega < 0.0) throw InvalidParameter("potential: omega must be nonnegative");
    }
    double operator()(double x, double y, double z) const {
        return v0 + omega * (x * x + y * y + z * z);
    }
};

// --- hypothesis self-checks ----------------------------------------------

struct HypothesisCheck {
    std::string name;
    bool pass = false;
    double detail = 0.0;  // worst margin or trend value, check-specific
};

struct HypothesisReport {
    std::vector<HypothesisCheck> checks;

    bool passed(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return c.pass;
        throw InvalidParameter("hypothesis report: unknown check " + name);
    }
    bool all_pass() const {
        return std::all_of(checks.begin(), checks.end(),
                           [](const HypothesisCheck& c) { return c.pass; });
    }
};

/// Sample-based verdicts for (f1)-(f4) and the two monotonicity facts
/// implied by (f4): f(t)/t^3 nondecreasing and f(t)t - 4F(t) nondecreasing
/// on the positive axis.
inline HypothesisReport check_hypotheses(const Nonlinearity& m, std::vector<double> samples) {
    if (samples.size() < 8) throw InvalidParameter("check_hypotheses: need at least 8 samples");
    if (!std::is_sorted(samples.begin(), samples.end()))
        throw InvalidParameter("check_hypotheses: samples must be sorted");
    if (!(samples.front() > 0.0))
        throw InvalidParameter("check_hypotheses: samples must be positive");
    if (samples.back() / samples.front() < 1e4)
        throw InvalidParameter("check_hypotheses: samples must span at least 4 decades");

    HypothesisReport rep;
    const double slack = 1e-12;

    // (f1): f(t)/t -> 0 as t -> 0: nonincreasing toward the smallest samples
    // and small at the bottom of the range.
    {
        bool mono = true;
        for (std::size_t i = 1; i < samples.size() && samples[i] <= 1.0; ++i) {
            const double lo = f_eval(m, samples[i - 1]) / samples[i - 1];
            const double hi = f_eval(m, samples[i]) / samples[i];
            if (lo > hi * (1.0 + slack) + slack) mono = false;
        }
        const double bottom = f_eval(m, samples.front()) / samples.front();
        const bool small = bottom < 1e-3;
        rep.checks.push_back({"f1", mono && small, bottom});
    }
    // (f2): f(t)/t^5 -> 0 as t -> infinity: decreasing across the top decade.
    {
        const double top = samples.back();
        bool ok = true;
        double prev = -1.0;
        for (double t : samples) {
            if (t < top / 10.0) continue;
            const double r = f_eval(m, t) / std::pow(t, 5.0);
            if (prev >= 0.0 && r > prev * (1.0 - 1e-9) + slack) ok = false;
            prev = r;
        }
        const double r_top = f_eval(m, top) / std::pow(top, 5.0);
        const double r_dec = f_eval(m, top / 10.0) / std::pow(top / 10.0, 5.0);
        if (!(r_top < r_dec)) ok = false;
        rep.checks.push_back({"f2", ok, r_top});
    }
    // (f3): F(t)/t^4 -> +infinity: nondecreasing for t >= 1 with strict growth.
    {
        bool mono = true;
        double first = -1.0, last = -1.0;
        double prev = -1.0;
        for (double t : samples) {
            if (t < 1.0) continue;
            const double r = F_eval(m, t) / (t * t * t * t);
            if (prev >= 0.0 && r < prev * (1.0 - 1e-9)) mono = false;
            if (first < 0.0) first = r;
            last = r;
            prev = r;
        }
        const double growth = (first > 0.0) ? last / first : 0.0;
        rep.checks.push_back({"f3", mono && growth > 1.5, growth});
    }
    // (f4): 0 < 3 f(t) t <= f'(t) t^2 at every sample.
    {
        bool ok = true;
        double worst = std::numeric_limits<double>::infinity();
        for (double t : samples) {
            const double lhs = 3.0 * f_eval(m, t) * t;
            const double rhs = fprime_eval(m, t) * t * t;
            if (!(lhs > 0.0) || lhs > rhs * (1.0 + slack)) ok = false;
            worst = std::min(worst, rhs - lhs);
        }
        rep.checks.push_back({"f4", ok, worst});
    }
    // Remark consequence: f(t)/t^3 nondecreasing in t > 0.
    {
        bool ok = true;
        for (std::size_t i = 1; i < samples.size(); ++i) {
            const double lo = f_eval(m, samples[i - 1]) / std::pow(samples[i - 1], 3.0);
            const double hi = f_eval(m, samples[i]) / std::pow(samples[i], 3.0);
            if (hi < lo * (1.0 - 1e-9) - slack) ok = false;
        }
        rep.checks.push_back({"mono_f_over_t3", ok, 0.0});
    }
    // Remark consequence: f(t)t - 4F(t) nondecreasing on the positive axis.
    {
        bool ok = true;
        for (std::size_t i = 1; i < samples.size(); ++i) {
            const double lo = f_eval(m, samples[i - 1]) * samples[i - 1] - 4.0 * F_eval(m, samples[i - 1]);
            const double hi = f_eval(m, samples[i]) * samples[i] - 4.0 * F_eval(m, samples[i]);
            if (hi < lo - std::abs(lo) * 1e-9 - slack) ok = false;
        }
        rep.checks.push_back({"mono_ft_minus_4F", ok, 0.0});
    }
    return rep;
}

/// Default sample ladder for the hypothesis checker: log-spaced over
/// [1e-3, 1e2], five decades.
inline std::vector<double> default_hypothesis_samples() {
    std::vector<double> s;
    for (int i = 0; i <= 50; ++i) s.push_back(std::pow(10.0, -3.0 + 0.1 * i));
    return s;
}

}  // namespace sbp
