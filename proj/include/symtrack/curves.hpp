#pragma once

#include "symtrack/group_state.hpp"
#include "symtrack/rational.hpp"

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace symtrack {

/// C1 reference curve on SE(3) over [0, duration]. Body velocity is the
/// left-trivialized derivative xi = (omega, v) with A' = A S(omega), r' = A v.
class ReferenceCurve {
public:
    virtual ~ReferenceCurve() = default;

    virtual double duration() const = 0;
    virtual Pose value(double t) const = 0;
    virtual Vec body_velocity(double t) const = 0;

    /// d/dt of body_velocity. Default uses central differences; builtins
    /// override with the analytic derivative.
    virtual Vec body_velocity_dot(double t) const;
};

using CurvePtr = std::shared_ptr<const ReferenceCurve>;

/// Straight line of the given length along +x, identity attitude.
CurvePtr make_line(double length, double duration);

/// One turn of a radius-R circle in the (x, y) plane starting at the origin,
/// identity attitude throughout.
CurvePtr make_circle(double radius, double duration);

/// One turn of a helix: circle in (x, y) plus pitch in z per turn.
CurvePtr make_helix(double radius, double pitch, double duration);

/// Pure attitude rotation about body axis by the given angle, constant rate.
CurvePtr make_attitude_slew(const Eigen::Vector3d& axis, double angle, double duration);

/// SE(3) waypoints with C1 Hermite interpolation. Velocities are optional;
/// when absent they are estimated Catmull-Rom style. Throws
/// std::invalid_argument on fewer than two samples, non-increasing times, or
/// a C1 defect above tol at the joints.
struct Waypoint {
    double t;
    Pose pose;
    bool has_velocity = false;
    Eigen::Vector3d rdot = Eigen::Vector3d::Zero();  // world-frame position rate
    Eigen::Vector3d omega = Eigen::Vector3d::Zero(); // body angular velocity
};
CurvePtr make_waypoint_curve(std::vector<Waypoint> points, double c1_tol = 1e-6);

/// Max finite-difference mismatch between consecutive-segment values and
/// velocities at interior joints; used by the waypoint constructor.
double c1_defect(const ReferenceCurve& curve, const std::vector<double>& joints);

class MechSystemTag;
template <class T>
class MechSystemT;

/// Reference curve built from a simulated trajectory, with the trajectory's
/// exact body velocities at the samples (stride subsamples long runs).
CurvePtr make_trajectory_curve(const MechSystemT<double>& sys, const Trajectory& traj,
                               int stride = 1);

} // namespace symtrack
