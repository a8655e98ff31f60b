#include "symtrack/tracking.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <future>
#include <thread>

namespace symtrack {

namespace {

Mat columns(const std::vector<Vec>& vs, int dim)
{
    Mat m(dim, static_cast<Eigen::Index>(vs.size()));
    for (std::size_t j = 0; j < vs.size(); ++j)
        m.col(static_cast<Eigen::Index>(j)) = vs[j];
    return m;
}

Mat pseudo_inverse(const Mat& m)
{
    if (m.cols() == 0)
        return Mat(0, m.rows());
    return m.completeOrthogonalDecomposition().pseudoInverse();
}

/// Orthogonal projector onto the column space.
Mat projector(const Mat& m, double rank_tol = 1e-12)
{
    if (m.cols() == 0)
        return Mat::Zero(m.rows(), m.rows());
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    Mat p = Mat::Zero(m.rows(), m.rows());
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > rank_tol * sv(0))
            p += svd.matrixU().col(i) * svd.matrixU().col(i).transpose();
    return p;
}

/// Chebyshev interpolants of each output channel of f over [0, duration].
std::vector<Polynomial> fit_channels(const std::function<Vec(double)>& f, int rows,
                                     int degree, double duration)
{
    std::vector<Polynomial> out;
    out.reserve(rows);
    // evaluate f once per node, not once per channel
    const int n = degree + 1;
    std::vector<Vec> values(n);
    for (int j = 0; j < n; ++j) {
        const double x = std::cos(M_PI * (j + 0.5) / n);
        const double t = 0.5 * duration + 0.5 * duration * x;
        values[j] = f(t);
    }
    for (int row = 0; row < rows; ++row) {
        std::vector<double> coeffs(n, 0.0);
        for (int k = 0; k < n; ++k) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j)
                acc += values[j](row) * std::cos(M_PI * k * (j + 0.5) / n);
            coeffs[k] = 2.0 * acc / n;
        }
        coeffs[0] *= 0.5;
        out.emplace_back(std::move(coeffs), 0.0, duration);
    }
    return out;
}

std::vector<ModulatedSignal> apply_matrix(const Mat& m,
                                          const std::vector<ModulatedSignal>& v,
                                          double duration)
{
    std::vector<ModulatedSignal> out(static_cast<std::size_t>(m.rows()),
                                     ModulatedSignal::zero(0.0, duration));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (m(i, j) != 0.0)
                out[static_cast<std::size_t>(i)] =
                    out[static_cast<std::size_t>(i)] + v[static_cast<std::size_t>(j)] * m(i, j);
    return out;
}

std::vector<ModulatedSignal> field_combination(const std::vector<Vec>& fields,
                                               const std::vector<ModulatedSignal>& coeffs,
                                               int dim, double duration)
{
    std::vector<ModulatedSignal> out(static_cast<std::size_t>(dim),
                                     ModulatedSignal::zero(0.0, duration));
    for (std::size_t a = 0; a < fields.size(); ++a)
        for (int i = 0; i < dim; ++i)
            if (fields[a](i) != 0.0)
                out[static_cast<std::size_t>(i)] =
                    out[static_cast<std::size_t>(i)] + coeffs[a] * fields[a](i);
    return out;
}

double probe_max(const std::function<double(double)>& f, double duration, int probes)
{
    double worst = 0.0;
    for (int i = 0; i <= probes; ++i)
        worst = std::max(worst, f(duration * i / probes));
    return worst;
}

int numerical_rank(const Mat& m, double tol = 1e-10)
{
    if (m.cols() == 0)
        return 0;
    Eigen::JacobiSVD<Mat> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0)
        return 0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol * sv(0))
            ++rank;
    return rank;
}

} // namespace

KinematicPlan kinematic_synthesis(const LieAlgebra& g, const std::vector<Vec>& fields,
                                  const VelocityFn& xi_ref, double duration,
                                  double omega_osc_hz, const TrackingParams& params)
{
    if (fields.empty())
        throw SynthesisError("kinematic", "no generator fields");
    if (duration <= 0.0)
        throw SynthesisError("kinematic", "duration must be positive");
    if (omega_osc_hz <= 0.0)
        throw SynthesisError("kinematic", "oscillation frequency must be positive");
    const int n = g.dim();
    const int k = static_cast<int>(fields.size());

    KinematicPlan plan;
    plan.fields = fields;
    plan.duration = duration;

    const Mat b_dir = columns(fields, n);
    const Mat p_dir = projector(b_dir);
    const Mat p_dir_comp = Mat::Identity(n, n) - p_dir;

    // choose bracket directions that extend the direct span
    {
        Mat extended = b_dir;
        for (int a = 0; a < k; ++a)
            for (int b = a + 1; b < k; ++b) {
                const Vec br = g.bracket(fields[a], fields[b]);
                if (br.norm() <= 1e-14)
                    continue;
                Mat probe(n, extended.cols() + 1);
                probe << extended, br;
                if (numerical_rank(probe) > numerical_rank(extended)) {
                    plan.bracket_fields.push_back(br);
                    plan.bracket_pairs.emplace_back(a, b);
                    extended = probe;
                }
            }
    }

    const Mat b_br = columns(plan.bracket_fields, n);
    const Mat w_br_map =
        plan.bracket_fields.empty() ? Mat(0, n) : pseudo_inverse(p_dir_comp * b_br) * p_dir_comp;
    const Mat w_dir_map = pseudo_inverse(b_dir);

    // feasibility: the extended span must carry the velocity everywhere
    double xi_scale = 1e-12;
    {
        const Mat p_ext = projector(b_br.cols() ? (Mat(n, k + b_br.cols()) << b_dir, b_br)
                                                      .finished()
                                                : b_dir);
        double worst = 0.0;
        for (int i = 0; i <= 400; ++i) {
            const double t = duration * i / 400;
            const Vec xi = xi_ref(t);
            xi_scale = std::max(xi_scale, xi.norm());
            worst = std::max(worst, ((Mat::Identity(n, n) - p_ext) * xi).norm());
        }
        if (worst > params.decomposition_tol * std::max(xi_scale, 1e-9))
            throw SynthesisError("kinematic",
                                 "reference velocity leaves the depth-2 bracket span",
                                 worst / std::max(xi_scale, 1e-9));
    }

    // smooth coefficient profiles
    const int degree = params.envelope_degree;
    const auto w_br_fn = [&](double t) { return Vec(w_br_map * xi_ref(t)); };
    const auto w_dir_fn = [&](double t) {
        const Vec xi = xi_ref(t);
        if (b_br.cols() == 0)
            return Vec(w_dir_map * xi);
        return Vec(w_dir_map * (xi - b_br * (w_br_map * xi)));
    };
    std::vector<Polynomial> w_br =
        plan.bracket_fields.empty()
            ? std::vector<Polynomial>{}
            : fit_channels(w_br_fn, static_cast<int>(plan.bracket_fields.size()), degree,
                           duration);
    std::vector<Polynomial> w_dir = fit_channels(w_dir_fn, k, degree, duration);

    // interpolation + decomposition residual
    plan.fit_residual = probe_max(
                            [&](double t) {
                                Vec rec = Vec::Zero(n);
                                for (int a = 0; a < k; ++a)
                                    rec += w_dir[a].eval(t) * fields[a];
                                for (std::size_t j = 0; j < plan.bracket_fields.size(); ++j)
                                    rec += w_br[j].eval(t) * plan.bracket_fields[j];
                                return (rec - xi_ref(t)).norm();
                            },
                            duration, 997) /
                        std::max(xi_scale, 1e-9);
    if (plan.fit_residual > params.decomposition_tol)
        throw SynthesisError("kinematic", "coefficient profiles failed to interpolate",
                             plan.fit_residual);

    // assemble the channel signals
    std::vector<ModulatedSignal> channels(static_cast<std::size_t>(k),
                                          ModulatedSignal::zero(0.0, duration));
    for (int a = 0; a < k; ++a) {
        channels[static_cast<std::size_t>(a)] = ModulatedSignal(w_dir[a]);
        plan.direct_coeffs.push_back(ModulatedSignal(w_dir[a]));
    }
    for (std::size_t j = 0; j < plan.bracket_fields.size(); ++j) {
        plan.bracket_coeffs.push_back(ModulatedSignal(w_br[j]));
        const double scale = std::sqrt(w_br[j].max_abs());
        if (scale <= 1e-12)
            continue; // this bracket direction is never needed
        plan.uses_oscillation = true;
        const double omega = 2.0 * M_PI * omega_osc_hz * static_cast<double>(j + 1);
        const double amp = std::sqrt(2.0 * omega);
        const auto [a, b] = plan.bracket_pairs[j];
        // u_a = (w_j / R) sqrt(2w) cos(wt), u_b = R sqrt(2w) sin(wt):
        // averaged flow drifts with rate w_j along [X_a, X_b]
        channels[static_cast<std::size_t>(a)] =
            channels[static_cast<std::size_t>(a)] +
            ModulatedSignal::oscillation(w_br[j] * (amp / scale), omega, 0.0);
        channels[static_cast<std::size_t>(b)] =
            channels[static_cast<std::size_t>(b)] +
            ModulatedSignal::oscillation(
                Polynomial::constant(scale * amp, 0.0, duration), omega, -M_PI / 2.0);
    }
    plan.controls.channels = std::move(channels);
    return plan;
}

namespace {

/// dexpinv truncated past the terms an order-4 step needs.
Vec dexpinv4(const LieAlgebra& g, const Vec& theta, const Vec& xi)
{
    const Vec b1 = g.bracket(theta, xi);
    const Vec b2 = g.bracket(theta, b1);
    return xi - 0.5 * b1 + (1.0 / 12.0) * b2;
}

Pose se3_compose(const Pose& g1, const Pose& g2)
{
    Pose out;
    out.A = g1.A * g2.A;
    out.r = g1.r + g1.A * g2.r;
    return out;
}

} // namespace

std::vector<Pose> kinematic_flow_se3(const LieAlgebra& g, const std::vector<Vec>& fields,
                                     const ControlSignal& controls, const Pose& start,
                                     double t_final, double dt, int record_stride,
                                     std::vector<double>* times_out)
{
    if (g.dim() != 6)
        throw std::invalid_argument("kinematic_flow_se3 needs a 6-dimensional algebra");
    const long long steps =
        std::max(1LL, static_cast<long long>(std::llround(t_final / dt)));
    const double h = t_final / static_cast<double>(steps);

    const auto xi_at = [&](double t) {
        Vec xi = Vec::Zero(6);
        const Vec u = controls.eval(t);
        for (std::size_t a = 0; a < fields.size(); ++a)
            xi += u(static_cast<Eigen::Index>(a)) * fields[a];
        return xi;
    };

    std::vector<Pose> out;
    Pose pose = start;
    out.push_back(pose);
    if (times_out) {
        times_out->clear();
        times_out->push_back(0.0);
    }
    for (long long s = 0; s < steps; ++s) {
        const double t = s * h;
        // Munthe-Kaas RK4: integrate theta' = dexpinv_theta(xi) from theta = 0
        const Vec k1 = h * xi_at(t);
        const Vec k2 = h * dexpinv4(g, 0.5 * k1, xi_at(t + 0.5 * h));
        const Vec k3 = h * dexpinv4(g, 0.5 * k2, xi_at(t + 0.5 * h));
        const Vec k4 = h * dexpinv4(g, k3, xi_at(t + h));
        const Vec theta = (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        pose = se3_compose(pose, se3_exp(theta));
        if ((s + 1) % record_stride == 0 || s + 1 == steps) {
            out.push_back(pose);
            if (times_out)
                times_out->push_back((s + 1 == steps) ? t_final : (s + 1) * h);
        }
    }
    return out;
}

std::vector<Vec> flow_exponential_coords(const LieAlgebra& g, const VelocityFn& xi,
                                         double t_final, double dt,
                                         std::vector<double>* times_out)
{
    const long long steps =
        std::max(1LL, static_cast<long long>(std::llround(t_final / dt)));
    const double h = t_final / static_cast<double>(steps);
    Vec theta = Vec::Zero(g.dim());
    std::vector<Vec> out{theta};
    if (times_out) {
        times_out->clear();
        times_out->push_back(0.0);
    }
    for (long long s = 0; s < steps; ++s) {
        const double t = s * h;
        const auto f = [&](const Vec& th, double tt) { return dexpinv4(g, th, xi(tt)); };
        const Vec k1 = h * f(theta, t);
        const Vec k2 = h * f(theta + 0.5 * k1, t + 0.5 * h);
        const Vec k3 = h * f(theta + 0.5 * k2, t + 0.5 * h);
        const Vec k4 = h * f(theta + k3, t + h);
        theta += (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        out.push_back(theta);
        if (times_out)
            times_out->push_back((s + 1 == steps) ? t_final : (s + 1) * h);
    }
    return out;
}

MechanicalPlan mechanical_synthesis(const MechSystem& sys, const KinematicPlan& kin,
                                    const TrackingParams& params)
{
    const int n = sys.algebra().dim();
    const int k = sys.num_controls();
    if (static_cast<int>(kin.fields.size()) != k)
        throw SynthesisError("mechanical", "kinematic plan channel count mismatch");
    for (int a = 0; a < k; ++a)
        if ((kin.fields[a] - sys.controls()[a]).norm() > 1e-12)
            throw SynthesisError("mechanical",
                                 "kinematic plan must run on the system's own controls");
    const double duration = kin.duration;

    MechanicalPlan plan;

    // stage-1 velocity profile and its covariant acceleration
    const auto& u_kin = kin.controls.channels;
    plan.xi_profile = field_combination(kin.fields, u_kin, n, duration);

    std::vector<ModulatedSignal> force(static_cast<std::size_t>(n),
                                       ModulatedSignal::zero(0.0, duration));
    for (int i = 0; i < n; ++i)
        force[static_cast<std::size_t>(i)] = plan.xi_profile[static_cast<std::size_t>(i)].derivative();

    // (1/2) <xi : xi> expanded over channel pairs
    for (int a = 0; a < k; ++a)
        for (int b = a; b < k; ++b) {
            const Vec p = sys.symmetric_product(kin.fields[a], kin.fields[b]);
            if (p.norm() <= 1e-14)
                continue;
            const double weight = (a == b) ? 0.5 : 1.0;
            const ModulatedSignal prod = u_kin[static_cast<std::size_t>(a)] *
                                         u_kin[static_cast<std::size_t>(b)] * weight;
            for (int i = 0; i < n; ++i)
                if (p(i) != 0.0)
                    force[static_cast<std::size_t>(i)] =
                        force[static_cast<std::size_t>(i)] + prod * p(i);
        }

    // subtract the drift force Y0 + D xi
    for (int i = 0; i < n; ++i) {
        if (sys.drift_const()(i) != 0.0)
            force[static_cast<std::size_t>(i)] =
                force[static_cast<std::size_t>(i)] -
                ModulatedSignal(Polynomial::constant(sys.drift_const()(i), 0.0, duration));
        for (int j = 0; j < n; ++j)
            if (sys.drift_linear()(i, j) != 0.0)
                force[static_cast<std::size_t>(i)] =
                    force[static_cast<std::size_t>(i)] -
                    plan.xi_profile[static_cast<std::size_t>(j)] * sys.drift_linear()(i, j);
    }

    // decomposition basis: direct channels plus cross products that extend it
    const Mat b_dir = columns(sys.controls(), n);
    const Mat p_dir = projector(b_dir);
    const Mat p_dir_comp = Mat::Identity(n, n) - p_dir;

    std::vector<Vec> prod_fields;
    std::vector<std::pair<int, int>> prod_pairs;
    {
        Mat extended = b_dir;
        for (int a = 0; a < k; ++a)
            for (int b = a + 1; b < k; ++b) {
                const Vec p = sys.symmetric_product(sys.controls()[a], sys.controls()[b]);
                if (p.norm() <= 1e-14)
                    continue;
                Mat probe(n, extended.cols() + 1);
                probe << extended, p;
                if (numerical_rank(probe) > numerical_rank(extended)) {
                    prod_fields.push_back(p);
                    prod_pairs.emplace_back(a, b);
                    extended = probe;
                }
            }
    }
    const Mat b_prod = columns(prod_fields, n);
    const Mat d_map =
        prod_fields.empty() ? Mat(0, n) : pseudo_inverse(p_dir_comp * b_prod) * p_dir_comp;
    const Mat lambda_map = pseudo_inverse(b_dir);

    std::vector<ModulatedSignal> d_coeffs = apply_matrix(d_map, force, duration);
    std::vector<ModulatedSignal> residual_force = force;
    for (std::size_t j = 0; j < prod_fields.size(); ++j)
        for (int i = 0; i < n; ++i)
            if (prod_fields[j](i) != 0.0)
                residual_force[static_cast<std::size_t>(i)] =
                    residual_force[static_cast<std::size_t>(i)] - d_coeffs[j] * prod_fields[j](i);
    std::vector<ModulatedSignal> lambda = apply_matrix(lambda_map, residual_force, duration);

    // residual of the force decomposition
    double force_scale = 1e-12;
    plan.fit_residual = probe_max(
        [&](double t) {
            Vec f(n), rec = Vec::Zero(n);
            for (int i = 0; i < n; ++i)
                f(i) = force[static_cast<std::size_t>(i)].eval(t);
            force_scale = std::max(force_scale, f.norm());
            for (int a = 0; a < k; ++a)
                rec += lambda[static_cast<std::size_t>(a)].eval(t) * sys.controls()[a];
            for (std::size_t j = 0; j < prod_fields.size(); ++j)
                rec += d_coeffs[j].eval(t) * prod_fields[j];
            return (rec - f).norm();
        },
        duration, 997);
    plan.fit_residual /= force_scale;
    if (plan.fit_residual > params.decomposition_tol)
        throw SynthesisError("mechanical",
                             "required force leaves the direct-plus-product span",
                             plan.fit_residual);

    // diagonal self-product debt of the oscillation channels must stay
    // representable; the reference systems have <Y_a : Y_a> = 0
    for (int a = 0; a < k; ++a) {
        const Vec self = sys.symmetric_product(sys.controls()[a], sys.controls()[a]);
        if (self.norm() > 1e-12 && !prod_fields.empty())
            throw SynthesisError("mechanical",
                                 "nonzero control self-products are not realizable by "
                                 "the sinusoidal pair construction");
    }

    // carrier frequency: separated above everything the envelopes contain
    double content = 1.0 / duration;
    for (const auto& sig : d_coeffs)
        content = std::max(content, sig.max_frequency() / (2.0 * M_PI));
    for (const auto& sig : lambda)
        content = std::max(content, sig.max_frequency() / (2.0 * M_PI));
    plan.carrier_hz = params.freq_separation * content;

    // realization
    std::vector<ModulatedSignal> channels;
    channels.reserve(static_cast<std::size_t>(k));
    for (int a = 0; a < k; ++a)
        channels.push_back(lambda[static_cast<std::size_t>(a)]);

    for (std::size_t j = 0; j < prod_fields.size(); ++j) {
        const double scale = std::sqrt(d_coeffs[j].amplitude_bound());
        if (scale <= 1e-12)
            continue;
        plan.uses_oscillation = true;
        const double omega = 2.0 * M_PI * plan.carrier_hz * static_cast<double>(j + 1);
        const auto [a, b] = prod_pairs[j];
        // velocity ripple V = mu_a phi Y_a + mu_b phi Y_b, phi = sqrt(2) sin(wt);
        // the averaged force gains -mu_a mu_b <Y_a : Y_b>, so mu_a mu_b = -d_j.
        // Controls are the exact derivative d/dt(mu phi), which keeps the
        // slow dynamics free of bookkeeping terms.
        const ModulatedSignal phi = ModulatedSignal::oscillation(
            Polynomial::constant(std::sqrt(2.0), 0.0, duration), omega, -M_PI / 2.0);
        const ModulatedSignal mu_a = d_coeffs[j] * (-1.0 / scale);
        const ModulatedSignal mu_b =
            ModulatedSignal(Polynomial::constant(scale, 0.0, duration));
        channels[static_cast<std::size_t>(a)] =
            channels[static_cast<std::size_t>(a)] + (mu_a * phi).derivative();
        channels[static_cast<std::size_t>(b)] =
            channels[static_cast<std::size_t>(b)] + (mu_b * phi).derivative();
    }
    plan.controls.channels = std::move(channels);
    return plan;
}

TrackResult track(const MechSystem& sys, const ReferenceCurve& curve,
                  const TrackingParams& params)
{
    require_se3(sys);
    const double duration = curve.duration();
    const int n = sys.algebra().dim();
    const int k = sys.num_controls();

    const auto report = analyze_z(sys, params.l_max);
    if (!report.positive())
        throw SynthesisError("analyze", "system admits no tracking certificate");
    if (!trackable_curve_z(sys, curve, report))
        throw SynthesisError("analyze", "curve velocity leaves the reachable distribution");

    TrackResult result;
    result.omega_osc_hz = params.omega_osc_hz;

    const auto xi_ref = [&](double t) { return curve.body_velocity(t); };

    // Direct-realization fast path: when the reference's own covariant
    // acceleration decomposes over the control directions, no oscillation is
    // needed and the initial velocity can be matched exactly.
    bool direct_path = false;
    ControlSignal controls;
    StageResiduals residuals;
    {
        const Mat b_dir = columns(sys.controls(), n);
        const Mat lambda_map = pseudo_inverse(b_dir);
        std::vector<Polynomial> xi_fit =
            fit_channels(xi_ref, n, params.envelope_degree, duration);
        double xi_scale = 1e-12;
        double fit_err = probe_max(
            [&](double t) {
                Vec xi(n);
                for (int i = 0; i < n; ++i)
                    xi(i) = xi_fit[static_cast<std::size_t>(i)].eval(t);
                const Vec truth = xi_ref(t);
                xi_scale = std::max(xi_scale, truth.norm());
                return (xi - truth).norm();
            },
            duration, 997);
        if (fit_err <= params.decomposition_tol * std::max(xi_scale, 1e-9)) {
            std::vector<ModulatedSignal> xi_sym;
            xi_sym.reserve(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                xi_sym.emplace_back(xi_fit[static_cast<std::size_t>(i)]);
            std::vector<ModulatedSignal> force(static_cast<std::size_t>(n),
                                               ModulatedSignal::zero(0.0, duration));
            for (int i = 0; i < n; ++i)
                force[static_cast<std::size_t>(i)] = xi_sym[static_cast<std::size_t>(i)].derivative();
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    const Vec p = sys.symmetric_product(Vec(Vec::Unit(n, i)), Vec(Vec::Unit(n, j)));
                    if (p.norm() <= 1e-14)
                        continue;
                    const double w = (i == j) ? 0.5 : 1.0;
                    const ModulatedSignal prod =
                        xi_sym[static_cast<std::size_t>(i)] * xi_sym[static_cast<std::size_t>(j)] * w;
                    for (int c = 0; c < n; ++c)
                        if (p(c) != 0.0)
                            force[static_cast<std::size_t>(c)] =
                                force[static_cast<std::size_t>(c)] + prod * p(c);
                }
            for (int i = 0; i < n; ++i) {
                if (sys.drift_const()(i) != 0.0)
                    force[static_cast<std::size_t>(i)] =
                        force[static_cast<std::size_t>(i)] -
                        ModulatedSignal(Polynomial::constant(sys.drift_const()(i), 0.0, duration));
                for (int j = 0; j < n; ++j)
                    if (sys.drift_linear()(i, j) != 0.0)
                        force[static_cast<std::size_t>(i)] =
                            force[static_cast<std::size_t>(i)] -
                            xi_sym[static_cast<std::size_t>(j)] * sys.drift_linear()(i, j);
            }
            std::vector<ModulatedSignal> lambda = apply_matrix(lambda_map, force, duration);
            double force_scale = 1e-9;
            double resid = probe_max(
                [&](double t) {
                    Vec f(n), rec = Vec::Zero(n);
                    for (int i = 0; i < n; ++i)
                        f(i) = force[static_cast<std::size_t>(i)].eval(t);
                    force_scale = std::max(force_scale, f.norm());
                    for (int a = 0; a < k; ++a)
                        rec += lambda[static_cast<std::size_t>(a)].eval(t) * sys.controls()[a];
                    return (rec - f).norm();
                },
                duration, 997);
            if (resid <= params.decomposition_tol * force_scale) {
                controls.channels = std::move(lambda);
                residuals.mechanical_fit = resid / force_scale;
                residuals.kinematic_fit = fit_err / std::max(xi_scale, 1e-9);
                direct_path = true;
                result.velocity_matched = true;
            }
        }
    }

    Vec xi_start;
    if (direct_path) {
        xi_start = xi_ref(0.0);
        result.residuals = residuals;
    } else {
        KinematicPlan kin = kinematic_synthesis(sys.algebra(), sys.controls(), xi_ref,
                                                duration, params.omega_osc_hz, params);
        MechanicalPlan mech = mechanical_synthesis(sys, kin, params);
        controls = mech.controls;
        result.residuals.kinematic_fit = kin.fit_residual;
        result.residuals.mechanical_fit = mech.fit_residual;

        // stage-1 diagnostic: how well does the oscillatory kinematic flow
        // follow the reference?
        {
            const double wmax = std::max(kin.controls.max_frequency(), 2.0 * M_PI / duration);
            const double dt_kin = (2.0 * M_PI / wmax) / params.oversample;
            std::vector<double> times;
            const auto poses =
                kinematic_flow_se3(sys.algebra(), kin.fields, kin.controls, curve.value(0.0),
                                   duration, dt_kin,
                                   std::max<long long>(1, std::llround(duration / dt_kin / 800)),
                                   &times);
            double worst = 0.0;
            for (std::size_t i = 0; i < poses.size(); ++i)
                worst = std::max(worst, se3_distance(poses[i], curve.value(times[i])));
            result.residuals.stage1_error = worst;
        }

        // the mechanical stage starts from the stage-1 velocity; the sin(0)=0
        // carrier phase keeps the oscillatory ripple out of the initial state
        xi_start = Vec::Zero(n);
        const Vec u0 = kin.controls.eval(0.0);
        for (int a = 0; a < k; ++a)
            xi_start += u0(a) * sys.controls()[a];
        result.velocity_matched = !kin.uses_oscillation &&
                                  (xi_start - xi_ref(0.0)).norm() <=
                                      1e-6 * std::max(1.0, xi_ref(0.0).norm());
    }

    // integration grid from the fastest carrier
    const double wmax = std::max(controls.max_frequency(), 2.0 * M_PI / duration);
    double dt = (2.0 * M_PI / wmax) / params.oversample;
    if (params.dt > 0.0)
        dt = std::min(dt, params.dt);
    const long long steps = std::max(1LL, static_cast<long long>(std::llround(duration / dt)));
    const int stride =
        std::max(1, static_cast<int>(steps / std::max(1, params.record_samples)));

    GroupState s0;
    const Pose start = curve.value(0.0);
    s0.A = start.A;
    s0.r = start.r;
    const Vec impulse = sys.inertia().matrix() * xi_start;
    s0.Pi = impulse.head<3>();
    s0.P = impulse.tail<3>();

    result.controls = controls;
    result.dt = dt;
    result.realized = integrate(
        sys, s0, [&controls](double t) { return controls.eval(t); }, duration, dt,
        {IntegrationMethod::rk4_reproject, stride, 1e-8});

    result.error_profile.reserve(result.realized.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < result.realized.size(); ++i) {
        const double err =
            se3_distance(result.realized.states[i].pose(), curve.value(result.realized.times[i]));
        result.error_profile.push_back(err);
        worst = std::max(worst, err);
    }
    result.max_error = worst;
    result.within_epsilon = worst < params.epsilon;
    return result;
}

std::vector<TrackResult> track_sweep(const MechSystem& sys, const ReferenceCurve& curve,
                                     const TrackingParams& params, int runs,
                                     int max_threads)
{
    if (runs < 1)
        throw std::invalid_argument("track_sweep needs at least one run");
    if (max_threads <= 0) {
        const char* env = std::getenv("SYMTRACK_THREADS");
        max_threads = env ? std::max(1, std::atoi(env))
                          : static_cast<int>(std::thread::hardware_concurrency());
        if (max_threads < 1)
            max_threads = 1;
    }

    std::vector<TrackResult> results(static_cast<std::size_t>(runs));
    std::vector<std::future<void>> pending;
    int next = 0;
    while (next < runs || !pending.empty()) {
        while (next < runs && static_cast<int>(pending.size()) < max_threads) {
            const int idx = next++;
            pending.push_back(std::async(std::launch::async, [&, idx]() {
                TrackingParams p = params;
                p.omega_osc_hz = params.omega_osc_hz * std::pow(2.0, idx);
                results[static_cast<std::size_t>(idx)] = track(sys, curve, p);
            }));
        }
        pending.front().get();
        pending.erase(pending.begin());
    }
    return results;
}

} // namespace symtrack
