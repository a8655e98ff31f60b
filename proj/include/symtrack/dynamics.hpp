#pragma once

#include "symtrack/group_state.hpp"
#include "symtrack/mech_system.hpp"

#include <functional>
#include <stdexcept>
#include <utility>

namespace symtrack {

/// Simulation aborted on a nonfinite state; time identifies the failed step.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double time)
        : std::runtime_error(what), time_(time)
    {
    }
    double time() const { return time_; }

private:
    double time_;
};

/// True when the algebra carries exactly the se(3) structure constants this
/// module hardcodes through its cross products.
bool is_se3(const LieAlgebra& g, double tol = 1e-12);

/// Throws std::invalid_argument unless the system's algebra is se(3).
void require_se3(const MechSystem& sys);

/// (omega, v) = M^{-1} (Pi, P).
std::pair<Eigen::Vector3d, Eigen::Vector3d> body_velocity(const MechSystem& sys,
                                                          const GroupState& s);

struct StateDerivative {
    Eigen::Matrix3d Adot;
    Eigen::Vector3d rdot;
    Eigen::Vector3d Pidot;
    Eigen::Vector3d Pdot;
};

/// Controlled Kirchhoff equations in impulse form:
///   dA/dt = A S(omega), dr/dt = A v,
///   dPi/dt = Pi x omega + P x v + angular forcing,
///   dP/dt  = P x omega + linear forcing,
/// with forcing M (sum_a u_a Y_a + Y0 + D xi). For the reference submarine
/// controls this is the (u1, u2, 0 | 0, 0, u3) injection pattern.
StateDerivative kirchhoff_rhs(const MechSystem& sys, const GroupState& s, const Vec& u);

enum class IntegrationMethod {
    rk4_reproject, // classical RK4 on the flat state, polar reprojection per step
    lie_euler      // A update through the group exponential, Euler elsewhere
};

using ControlFn = std::function<Vec(double)>;

struct IntegrateOptions {
    IntegrationMethod method = IntegrationMethod::rk4_reproject;
    int record_stride = 1;      // record every k-th step (first and last always)
    double attitude_tol = 1e-9; // initial-state orthogonality requirement
};

Trajectory integrate(const MechSystem& sys, const GroupState& s0, const ControlFn& control,
                     double t_final, double dt, const IntegrateOptions& opts = {});

/// Conserved quantities of the uncontrolled flow: (|P|^2, Pi . P).
std::pair<double, double> casimirs(const GroupState& s);

/// Kinetic energy of the state, (1/2) xi^T M xi with xi = M^{-1}(Pi, P).
double state_energy(const MechSystem& sys, const GroupState& s);

} // namespace symtrack
