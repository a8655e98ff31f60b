#pragma once

#include "symtrack/rational.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

namespace symtrack {

/// Configuration on SE(3): attitude and position.
struct Pose {
    Eigen::Matrix3d A = Eigen::Matrix3d::Identity();
    Eigen::Vector3d r = Eigen::Vector3d::Zero();
};

/// Full state of the rigid body: configuration plus impulse (Pi, P).
struct GroupState {
    Eigen::Matrix3d A = Eigen::Matrix3d::Identity();
    Eigen::Vector3d r = Eigen::Vector3d::Zero();
    Eigen::Vector3d Pi = Eigen::Vector3d::Zero();
    Eigen::Vector3d P = Eigen::Vector3d::Zero();

    Pose pose() const { return {A, r}; }
};

/// Time-sampled path with the controls that produced it.
struct Trajectory {
    std::vector<double> times;
    std::vector<GroupState> states;
    std::vector<Vec> controls; // one k-vector per sample

    std::size_t size() const { return times.size(); }
};

double orthogonality_residual(const Eigen::Matrix3d& a);

/// Throws std::invalid_argument unless A^T A = I within tol and det A > 0.
void validate_attitude(const Eigen::Matrix3d& a, double tol = 1e-9);

/// Rotation angle of R in [0, pi].
double rotation_angle(const Eigen::Matrix3d& r);

/// exp(S(w)) by the Rodrigues formula.
Eigen::Matrix3d rot_exp(const Eigen::Vector3d& w);

/// Inverse of rot_exp; returns the rotation vector with angle in [0, pi].
Eigen::Vector3d rot_log(const Eigen::Matrix3d& r);

/// Nearest rotation matrix in the Frobenius sense (polar factor, det +1).
Eigen::Matrix3d polar_orthonormalize(const Eigen::Matrix3d& m);

/// Right Jacobian of SO(3): body angular velocity = rot_right_jacobian(theta) * theta_dot
/// along A(t) = A0 exp(S(theta(t))).
Eigen::Matrix3d rot_right_jacobian(const Eigen::Vector3d& theta);

/// SE(3) exponential: xi = (omega, v) -> (A, r).
Pose se3_exp(const Vec& xi);

/// |r1 - r2| + rotation angle of A1^T A2.
double se3_distance(const Pose& p1, const Pose& p2);
double se3_distance(const GroupState& s1, const GroupState& s2);

/// CSV export, one row per sample:
/// t,A11..A33 (row-major),rx,ry,rz,Pi1..Pi3,P1..P3,u1..uk.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

} // namespace symtrack
