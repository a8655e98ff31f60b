#include "symtrack/dynamics.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace symtrack {

bool is_se3(const LieAlgebra& g, double tol)
{
    if (g.dim() != 6)
        return false;
    const LieAlgebra ref = se3();
    for (int i = 1; i <= 6; ++i)
        for (int j = 1; j <= 6; ++j)
            for (int k = 1; k <= 6; ++k)
                if (std::abs(g.structure_constant(i, j, k) - ref.structure_constant(i, j, k)) >
                    tol)
                    return false;
    return true;
}

void require_se3(const MechSystem& sys)
{
    if (!is_se3(sys.algebra()))
        throw std::invalid_argument(
            "rigid-body simulation requires the se(3) structure constants");
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> body_velocity(const MechSystem& sys,
                                                          const GroupState& s)
{
    Vec impulse(6);
    impulse << s.Pi, s.P;
    const Vec xi = sys.inertia().inverse() * impulse;
    return {xi.head<3>(), xi.tail<3>()};
}

namespace {

Vec control_forcing(const MechSystem& sys, const Vec& u, const Vec& xi)
{
    if (u.size() != sys.num_controls())
        throw std::invalid_argument("control vector length does not match the system");
    Vec field = sys.drift(xi);
    for (int a = 0; a < sys.num_controls(); ++a)
        field += u(a) * sys.controls()[a];
    return sys.inertia().matrix() * field;
}

} // namespace

StateDerivative kirchhoff_rhs(const MechSystem& sys, const GroupState& s, const Vec& u)
{
    const auto [omega, v] = body_velocity(sys, s);
    Vec xi(6);
    xi << omega, v;
    const Vec forcing = control_forcing(sys, u, xi);

    StateDerivative d;
    d.Adot = s.A * hat(omega);
    d.rdot = s.A * v;
    d.Pidot = s.Pi.cross(omega) + s.P.cross(v) + forcing.head<3>();
    d.Pdot = s.P.cross(omega) + forcing.tail<3>();
    return d;
}

namespace {

using Flat = Eigen::Matrix<double, 18, 1>;

Flat flatten(const GroupState& s)
{
    Flat y;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            y(3 * i + j) = s.A(i, j);
    y.segment<3>(9) = s.r;
    y.segment<3>(12) = s.Pi;
    y.segment<3>(15) = s.P;
    return y;
}

GroupState unflatten(const Flat& y)
{
    GroupState s;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            s.A(i, j) = y(3 * i + j);
    s.r = y.segment<3>(9);
    s.Pi = y.segment<3>(12);
    s.P = y.segment<3>(15);
    return s;
}

Flat flat_rhs(const MechSystem& sys, const Flat& y, const Vec& u)
{
    const GroupState s = unflatten(y);
    const StateDerivative d = kirchhoff_rhs(sys, s, u);
    Flat out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            out(3 * i + j) = d.Adot(i, j);
    out.segment<3>(9) = d.rdot;
    out.segment<3>(12) = d.Pidot;
    out.segment<3>(15) = d.Pdot;
    return out;
}

} // namespace

Trajectory integrate(const MechSystem& sys, const GroupState& s0, const ControlFn& control,
                     double t_final, double dt, const IntegrateOptions& opts)
{
    require_se3(sys);
    if (dt <= 0.0 || t_final <= 0.0)
        throw std::invalid_argument("integrate needs positive dt and t_final");
    if (opts.record_stride < 1)
        throw std::invalid_argument("record_stride must be at least 1");
    validate_attitude(s0.A, opts.attitude_tol);

    const auto steps_exact = t_final / dt;
    const long long steps = std::max(1LL, static_cast<long long>(std::llround(steps_exact)));
    const double h = t_final / static_cast<double>(steps);

    Trajectory traj;
    traj.times.reserve(static_cast<std::size_t>(steps / opts.record_stride) + 2);

    GroupState s = s0;
    double t = 0.0;
    auto record = [&](double time, const GroupState& state) {
        traj.times.push_back(time);
        traj.states.push_back(state);
        traj.controls.push_back(control(time));
    };
    auto check_finite = [&](const GroupState& state, double time) {
        if (!state.A.allFinite() || !state.r.allFinite() || !state.Pi.allFinite() ||
            !state.P.allFinite())
            throw IntegrationError("state became nonfinite", time);
    };

    record(0.0, s);
    for (long long k = 0; k < steps; ++k) {
        if (opts.method == IntegrationMethod::rk4_reproject) {
            const Flat y0 = flatten(s);
            const Flat k1 = flat_rhs(sys, y0, control(t));
            const Flat k2 = flat_rhs(sys, y0 + 0.5 * h * k1, control(t + 0.5 * h));
            const Flat k3 = flat_rhs(sys, y0 + 0.5 * h * k2, control(t + 0.5 * h));
            const Flat k4 = flat_rhs(sys, y0 + h * k3, control(t + h));
            s = unflatten(y0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
            s.A = polar_orthonormalize(s.A);
        } else {
            const auto [omega, v] = body_velocity(sys, s);
            const StateDerivative d = kirchhoff_rhs(sys, s, control(t));
            GroupState next;
            next.A = s.A * rot_exp(h * omega);
            next.r = s.r + h * (s.A * v);
            next.Pi = s.Pi + h * d.Pidot;
            next.P = s.P + h * d.Pdot;
            s = next;
        }
        t = (k + 1 == steps) ? t_final : (k + 1) * h;
        check_finite(s, t);
        if ((k + 1) % opts.record_stride == 0 || k + 1 == steps)
            record(t, s);
    }
    return traj;
}

std::pair<double, double> casimirs(const GroupState& s)
{
    return {s.P.squaredNorm(), s.Pi.dot(s.P)};
}

double state_energy(const MechSystem& sys, const GroupState& s)
{
    Vec impulse(6);
    impulse << s.Pi, s.P;
    const Vec xi = sys.inertia().inverse() * impulse;
    return sys.energy(xi);
}

} // namespace symtrack
