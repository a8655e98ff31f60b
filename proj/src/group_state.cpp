#include "symtrack/group_state.hpp"

#include "symtrack/lie_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace symtrack {

double orthogonality_residual(const Eigen::Matrix3d& a)
{
    return (a.transpose() * a - Eigen::Matrix3d::Identity()).norm();
}

void validate_attitude(const Eigen::Matrix3d& a, double tol)
{
    if (!a.allFinite())
        throw std::invalid_argument("attitude contains nonfinite entries");
    if (orthogonality_residual(a) > tol)
        throw std::invalid_argument("attitude is not orthogonal within tolerance");
    if (a.determinant() <= 0.0)
        throw std::invalid_argument("attitude has nonpositive determinant");
}

double rotation_angle(const Eigen::Matrix3d& r)
{
    const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
    return std::acos(c);
}

Eigen::Matrix3d rot_exp(const Eigen::Vector3d& w)
{
    const double theta = w.norm();
    const Eigen::Matrix3d s = hat(w);
    if (theta < 1e-10) {
        // second-order series; error O(theta^3) is below double roundoff here
        return Eigen::Matrix3d::Identity() + s + 0.5 * s * s;
    }
    const double a = std::sin(theta) / theta;
    const double b = (1.0 - std::cos(theta)) / (theta * theta);
    return Eigen::Matrix3d::Identity() + a * s + b * s * s;
}

Eigen::Vector3d rot_log(const Eigen::Matrix3d& r)
{
    const double theta = rotation_angle(r);
    if (theta < 1e-10) {
        const Eigen::Matrix3d skew = 0.5 * (r - r.transpose());
        return {skew(2, 1), skew(0, 2), skew(1, 0)};
    }
    if (theta > M_PI - 1e-6) {
        // near-pi: axis from the symmetric part
        const Eigen::Matrix3d b = 0.5 * (r + Eigen::Matrix3d::Identity());
        Eigen::Vector3d axis(std::sqrt(std::max(b(0, 0), 0.0)),
                             std::sqrt(std::max(b(1, 1), 0.0)),
                             std::sqrt(std::max(b(2, 2), 0.0)));
        int imax = 0;
        b.diagonal().maxCoeff(&imax);
        if (axis(imax) > 0) {
            for (int i = 0; i < 3; ++i) {
                if (i == imax)
                    continue;
                if (b(imax, i) < 0)
                    axis(i) = -axis(i);
            }
        }
        axis.normalize();
        // fix sign using the skew part where it is nonzero
        const Eigen::Matrix3d skew = 0.5 * (r - r.transpose());
        const Eigen::Vector3d s(skew(2, 1), skew(0, 2), skew(1, 0));
        if (s.dot(axis) < 0)
            axis = -axis;
        return theta * axis;
    }
    const Eigen::Matrix3d skew = 0.5 * (r - r.transpose());
    const Eigen::Vector3d s(skew(2, 1), skew(0, 2), skew(1, 0));
    return (theta / std::sin(theta)) * s;
}

Eigen::Matrix3d polar_orthonormalize(const Eigen::Matrix3d& m)
{
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d u = svd.matrixU();
    const Eigen::Matrix3d v = svd.matrixV();
    if ((u * v.transpose()).determinant() < 0.0)
        u.col(2) = -u.col(2);
    return u * v.transpose();
}

Eigen::Matrix3d rot_right_jacobian(const Eigen::Vector3d& theta)
{
    const double t = theta.norm();
    const Eigen::Matrix3d s = hat(theta);
    if (t < 1e-8)
        return Eigen::Matrix3d::Identity() - 0.5 * s + (1.0 / 6.0) * s * s;
    const double a = (1.0 - std::cos(t)) / (t * t);
    const double b = (t - std::sin(t)) / (t * t * t);
    return Eigen::Matrix3d::Identity() - a * s + b * s * s;
}

Pose se3_exp(const Vec& xi)
{
    if (xi.size() != 6)
        throw std::invalid_argument("se3_exp expects a 6-vector");
    const Eigen::Vector3d w = xi.head<3>();
    const Eigen::Vector3d v = xi.tail<3>();
    Pose p;
    p.A = rot_exp(w);
    const double theta = w.norm();
    const Eigen::Matrix3d s = hat(w);
    Eigen::Matrix3d vmat;
    if (theta < 1e-10) {
        vmat = Eigen::Matrix3d::Identity() + 0.5 * s + (1.0 / 6.0) * s * s;
    } else {
        const double a = (1.0 - std::cos(theta)) / (theta * theta);
        const double b = (theta - std::sin(theta)) / (theta * theta * theta);
        vmat = Eigen::Matrix3d::Identity() + a * s + b * s * s;
    }
    p.r = vmat * v;
    return p;
}

double se3_distance(const Pose& p1, const Pose& p2)
{
    return (p1.r - p2.r).norm() + rotation_angle(p1.A.transpose() * p2.A);
}

double se3_distance(const GroupState& s1, const GroupState& s2)
{
    return se3_distance(s1.pose(), s2.pose());
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj)
{
    const int k = traj.controls.empty() ? 0 : static_cast<int>(traj.controls.front().size());
    out << "t";
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j)
            out << ",A" << i << j;
    out << ",rx,ry,rz,Pi1,Pi2,Pi3,P1,P2,P3";
    for (int a = 1; a <= k; ++a)
        out << ",u" << a;
    out << "\n";
    out.precision(15);
    for (std::size_t s = 0; s < traj.size(); ++s) {
        out << traj.times[s];
        const GroupState& st = traj.states[s];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                out << "," << st.A(i, j);
        for (int i = 0; i < 3; ++i)
            out << "," << st.r(i);
        for (int i = 0; i < 3; ++i)
            out << "," << st.Pi(i);
        for (int i = 0; i < 3; ++i)
            out << "," << st.P(i);
        if (k > 0) {
            const Vec& u = traj.controls[s];
            for (int a = 0; a < k; ++a)
                out << "," << u(a);
        }
        out << "\n";
    }
}

} // namespace symtrack
