#include "symtrack/signals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace symtrack {

namespace {
constexpr double kCoeffEps = 1e-14;
constexpr double kFreqMergeTol = 1e-9;
} // namespace

Polynomial::Polynomial(std::vector<double> cheb_coeffs, double a, double b)
    : coeffs_(std::move(cheb_coeffs)), a_(a), b_(b)
{
    if (!(b_ > a_))
        throw std::invalid_argument("polynomial domain must have positive length");
    trim();
}

Polynomial Polynomial::zero(double a, double b)
{
    return Polynomial({}, a, b);
}

Polynomial Polynomial::constant(double value, double a, double b)
{
    return Polynomial({value}, a, b);
}

Polynomial Polynomial::interpolate(const std::function<double(double)>& f, int degree,
                                   double a, double b)
{
    if (degree < 0)
        throw std::invalid_argument("interpolation degree must be nonnegative");
    const int n = degree + 1;
    std::vector<double> values(n);
    for (int j = 0; j < n; ++j) {
        const double x = std::cos(M_PI * (j + 0.5) / n); // first-kind nodes
        const double t = 0.5 * (a + b) + 0.5 * (b - a) * x;
        values[j] = f(t);
    }
    std::vector<double> coeffs(n, 0.0);
    for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j)
            acc += values[j] * std::cos(M_PI * k * (j + 0.5) / n);
        coeffs[k] = 2.0 * acc / n;
    }
    coeffs[0] *= 0.5;
    return Polynomial(std::move(coeffs), a, b);
}

double Polynomial::eval(double t) const
{
    if (coeffs_.empty())
        return 0.0;
    const double x = (2.0 * t - (a_ + b_)) / (b_ - a_);
    // Clenshaw recurrence
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t k = coeffs_.size(); k-- > 1;) {
        const double tmp = 2.0 * x * b1 - b2 + coeffs_[k];
        b2 = b1;
        b1 = tmp;
    }
    return x * b1 - b2 + coeffs_[0];
}

Polynomial Polynomial::derivative() const
{
    if (coeffs_.size() <= 1)
        return zero(a_, b_);
    const int n = static_cast<int>(coeffs_.size()) - 1;
    std::vector<double> d(static_cast<std::size_t>(n) + 1, 0.0);
    // standard Chebyshev derivative recurrence on [-1, 1]
    d[n] = 0.0;
    if (n >= 1)
        d[n - 1] = 2.0 * n * coeffs_[n];
    for (int k = n - 1; k >= 1; --k)
        d[k - 1] = (k + 1 <= n ? d[k + 1] : 0.0) + 2.0 * k * coeffs_[k];
    d[0] *= 0.5;
    d.pop_back();
    const double scale = 2.0 / (b_ - a_);
    for (double& c : d)
        c *= scale;
    return Polynomial(std::move(d), a_, b_);
}

Polynomial Polynomial::operator+(const Polynomial& o) const
{
    require_same_domain(o);
    std::vector<double> c(std::max(coeffs_.size(), o.coeffs_.size()), 0.0);
    for (std::size_t k = 0; k < coeffs_.size(); ++k)
        c[k] += coeffs_[k];
    for (std::size_t k = 0; k < o.coeffs_.size(); ++k)
        c[k] += o.coeffs_[k];
    return Polynomial(std::move(c), a_, b_);
}

Polynomial Polynomial::operator-(const Polynomial& o) const
{
    return *this + (o * -1.0);
}

Polynomial Polynomial::operator*(const Polynomial& o) const
{
    require_same_domain(o);
    if (coeffs_.empty() || o.coeffs_.empty())
        return zero(a_, b_);
    // T_m T_n = (T_{m+n} + T_{|m-n|}) / 2
    std::vector<double> c(coeffs_.size() + o.coeffs_.size() - 1, 0.0);
    for (std::size_t m = 0; m < coeffs_.size(); ++m)
        for (std::size_t n = 0; n < o.coeffs_.size(); ++n) {
            const double half = 0.5 * coeffs_[m] * o.coeffs_[n];
            c[m + n] += half;
            c[m > n ? m - n : n - m] += half;
        }
    return Polynomial(std::move(c), a_, b_);
}

Polynomial Polynomial::operator*(double s) const
{
    std::vector<double> c = coeffs_;
    for (double& v : c)
        v *= s;
    return Polynomial(std::move(c), a_, b_);
}

double Polynomial::max_abs(int probes) const
{
    double worst = 0.0;
    for (int i = 0; i < probes; ++i) {
        const double t = a_ + (b_ - a_) * i / (probes - 1);
        worst = std::max(worst, std::abs(eval(t)));
    }
    return worst;
}

void Polynomial::trim()
{
    double scale = 0.0;
    for (double c : coeffs_)
        scale = std::max(scale, std::abs(c));
    if (scale == 0.0) {
        coeffs_.clear();
        return;
    }
    while (!coeffs_.empty() && std::abs(coeffs_.back()) <= kCoeffEps * scale)
        coeffs_.pop_back();
}

void Polynomial::require_same_domain(const Polynomial& o) const
{
    if (a_ != o.a_ || b_ != o.b_)
        throw std::invalid_argument("polynomial domains differ");
}

// ---------------------------------------------------------------------------

ModulatedSignal::ModulatedSignal(Polynomial base) : base_(std::move(base)) {}

ModulatedSignal ModulatedSignal::zero(double a, double b)
{
    return ModulatedSignal(Polynomial::zero(a, b));
}

ModulatedSignal ModulatedSignal::oscillation(const Polynomial& env, double omega,
                                             double phase)
{
    ModulatedSignal s(Polynomial::zero(env.domain_lo(), env.domain_hi()));
    if (omega < 0.0)
        throw std::invalid_argument("carrier frequency must be nonnegative");
    // env cos(wt + phi) = env cos(phi) cos(wt) - env sin(phi) sin(wt)
    if (omega == 0.0) {
        s.base_ = env * std::cos(phase);
        return s;
    }
    s.add_term(omega, env * std::cos(phase), env * (-std::sin(phase)));
    s.normalize();
    return s;
}

double ModulatedSignal::eval(double t) const
{
    double v = base_.eval(t);
    for (const OscTerm& term : terms_)
        v += term.pc.eval(t) * std::cos(term.omega * t) +
             term.ps.eval(t) * std::sin(term.omega * t);
    return v;
}

ModulatedSignal ModulatedSignal::derivative() const
{
    ModulatedSignal out(base_.derivative());
    for (const OscTerm& term : terms_) {
        // d/dt [pc cos + ps sin] = (pc' + w ps) cos + (ps' - w pc) sin
        out.add_term(term.omega, term.pc.derivative() + term.ps * term.omega,
                     term.ps.derivative() - term.pc * term.omega);
    }
    out.normalize();
    return out;
}

ModulatedSignal ModulatedSignal::operator+(const ModulatedSignal& o) const
{
    ModulatedSignal out(base_ + o.base_);
    for (const OscTerm& term : terms_)
        out.add_term(term.omega, term.pc, term.ps);
    for (const OscTerm& term : o.terms_)
        out.add_term(term.omega, term.pc, term.ps);
    out.normalize();
    return out;
}

ModulatedSignal ModulatedSignal::operator-(const ModulatedSignal& o) const
{
    return *this + (o * -1.0);
}

ModulatedSignal ModulatedSignal::operator*(const ModulatedSignal& o) const
{
    const double a = domain_lo(), b = domain_hi();
    ModulatedSignal out(base_ * o.base_);

    for (const OscTerm& term : o.terms_)
        out.add_term(term.omega, base_ * term.pc, base_ * term.ps);
    for (const OscTerm& term : terms_)
        out.add_term(term.omega, o.base_ * term.pc, o.base_ * term.ps);

    for (const OscTerm& ti : terms_) {
        for (const OscTerm& tj : o.terms_) {
            const double sum = ti.omega + tj.omega;
            const double diff = ti.omega - tj.omega;
            // cc: pc_i pc_j (cos sum + cos diff)/2
            // cs: pc_i qs_j (sin sum - sin diff)/2
            // sc: ps_i qc_j (sin sum + sin diff)/2
            // ss: ps_i qs_j (cos diff - cos sum)/2
            const Polynomial cc = ti.pc * tj.pc * 0.5;
            const Polynomial cs = ti.pc * tj.ps * 0.5;
            const Polynomial sc = ti.ps * tj.pc * 0.5;
            const Polynomial ss = ti.ps * tj.ps * 0.5;

            out.add_term(sum, cc - ss, cs + sc);

            const double mag = std::abs(diff);
            const double sign = diff >= 0.0 ? 1.0 : -1.0; // sin(diff t) = sign sin(|diff| t)
            if (mag <= kFreqMergeTol * std::max(1.0, ti.omega + tj.omega)) {
                out.base_ = out.base_ + cc + ss; // cos(0)=1, sin(0)=0
            } else {
                out.add_term(mag, cc + ss, (sc - cs) * sign);
            }
        }
    }
    (void)a;
    (void)b;
    out.normalize();
    return out;
}

ModulatedSignal ModulatedSignal::operator*(double s) const
{
    ModulatedSignal out(base_ * s);
    for (const OscTerm& term : terms_)
        out.add_term(term.omega, term.pc * s, term.ps * s);
    out.normalize();
    return out;
}

double ModulatedSignal::max_frequency() const
{
    return terms_.empty() ? 0.0 : terms_.back().omega;
}

double ModulatedSignal::amplitude_bound() const
{
    double bound = base_.max_abs();
    for (const OscTerm& term : terms_)
        bound += term.pc.max_abs() + term.ps.max_abs();
    return bound;
}

void ModulatedSignal::add_term(double omega, const Polynomial& pc, const Polynomial& ps)
{
    if (omega <= 0.0)
        throw std::invalid_argument("carrier frequency must be positive");
    for (OscTerm& term : terms_) {
        if (std::abs(term.omega - omega) <= kFreqMergeTol * std::max(1.0, omega)) {
            term.pc = term.pc + pc;
            term.ps = term.ps + ps;
            return;
        }
    }
    terms_.push_back({omega, pc, ps});
}

void ModulatedSignal::normalize()
{
    std::sort(terms_.begin(), terms_.end(),
              [](const OscTerm& x, const OscTerm& y) { return x.omega < y.omega; });
    terms_.erase(std::remove_if(terms_.begin(), terms_.end(),
                                [](const OscTerm& t) {
                                    return t.pc.is_zero() && t.ps.is_zero();
                                }),
                 terms_.end());
}

Vec ControlSignal::eval(double t) const
{
    Vec u(channels.size());
    for (std::size_t a = 0; a < channels.size(); ++a)
        u(static_cast<Eigen::Index>(a)) = channels[a].eval(t);
    return u;
}

double ControlSignal::max_frequency() const
{
    double w = 0.0;
    for (const ModulatedSignal& s : channels)
        w = std::max(w, s.max_frequency());
    return w;
}

} // namespace symtrack
