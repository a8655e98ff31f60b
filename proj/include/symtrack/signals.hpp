#pragma once

#include "symtrack/rational.hpp"

#include <functional>
#include <vector>

namespace symtrack {

/// Chebyshev series on a fixed interval [a, b]. Closed under sums, products
/// and differentiation, which is what the control synthesis needs to keep
/// signals in closed form.
class Polynomial {
public:
    Polynomial() = default;
    Polynomial(std::vector<double> cheb_coeffs, double a, double b);

    static Polynomial zero(double a, double b);
    static Polynomial constant(double value, double a, double b);
    /// Interpolant of f at degree+1 Chebyshev nodes.
    static Polynomial interpolate(const std::function<double(double)>& f, int degree,
                                  double a, double b);

    double eval(double t) const;
    Polynomial derivative() const;

    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial operator*(double s) const;
    Polynomial operator-() const { return *this * -1.0; }

    /// Largest |value| over a probe grid.
    double max_abs(int probes = 257) const;

    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const { return coeffs_.empty(); }
    double domain_lo() const { return a_; }
    double domain_hi() const { return b_; }
    const std::vector<double>& cheb_coeffs() const { return coeffs_; }

private:
    void trim();
    void require_same_domain(const Polynomial& o) const;

    std::vector<double> coeffs_; // Chebyshev T_k coefficients
    double a_ = 0.0;
    double b_ = 1.0;
};

/// One carrier frequency with polynomial envelopes:
/// pc(t) cos(omega t) + ps(t) sin(omega t), omega > 0.
struct OscTerm {
    double omega;
    Polynomial pc;
    Polynomial ps;
};

/// Trig polynomial with slowly varying polynomial envelopes:
///   s(t) = base(t) + sum_j [pc_j(t) cos(w_j t) + ps_j(t) sin(w_j t)].
/// Closed under +, -, *, scalar multiples and d/dt, so products of controls
/// and their derivatives stay exactly representable.
class ModulatedSignal {
public:
    ModulatedSignal() = default;
    explicit ModulatedSignal(Polynomial base);

    static ModulatedSignal zero(double a, double b);
    /// env(t) * cos(omega t + phase); omega = 0 folds into the base.
    static ModulatedSignal oscillation(const Polynomial& env, double omega, double phase);

    double eval(double t) const;
    ModulatedSignal derivative() const;

    ModulatedSignal operator+(const ModulatedSignal& o) const;
    ModulatedSignal operator-(const ModulatedSignal& o) const;
    ModulatedSignal operator*(const ModulatedSignal& o) const;
    ModulatedSignal operator*(double s) const;
    ModulatedSignal operator-() const { return *this * -1.0; }

    double max_frequency() const;
    /// Conservative amplitude bound: sup of |base| plus envelope magnitudes.
    double amplitude_bound() const;

    const Polynomial& base() const { return base_; }
    const std::vector<OscTerm>& terms() const { return terms_; }
    double domain_lo() const { return base_.domain_lo(); }
    double domain_hi() const { return base_.domain_hi(); }

private:
    void add_term(double omega, const Polynomial& pc, const Polynomial& ps);
    void normalize();

    Polynomial base_;
    std::vector<OscTerm> terms_; // sorted by omega, all omega > 0
};

/// Per-channel control signal u_a(t).
struct ControlSignal {
    std::vector<ModulatedSignal> channels;

    int size() const { return static_cast<int>(channels.size()); }
    Vec eval(double t) const;
    double max_frequency() const;
};

} // namespace symtrack
