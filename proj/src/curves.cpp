#include "symtrack/curves.hpp"

#include "symtrack/lie_algebra.hpp"
#include "symtrack/mech_system.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace symtrack {

Vec ReferenceCurve::body_velocity_dot(double t) const
{
    const double h = std::max(1e-6, 1e-7 * duration());
    const double lo = std::max(0.0, t - h);
    const double hi = std::min(duration(), t + h);
    return (body_velocity(hi) - body_velocity(lo)) / (hi - lo);
}

namespace {

Vec pack_velocity(const Eigen::Vector3d& omega, const Eigen::Vector3d& v)
{
    Vec xi(6);
    xi << omega(0), omega(1), omega(2), v(0), v(1), v(2);
    return xi;
}

class LineCurve final : public ReferenceCurve {
public:
    LineCurve(double length, double duration) : length_(length), tau_(duration)
    {
        if (duration <= 0.0)
            throw std::invalid_argument("curve duration must be positive");
    }
    double duration() const override { return tau_; }
    Pose value(double t) const override
    {
        Pose p;
        p.r = Eigen::Vector3d(length_ * t / tau_, 0, 0);
        return p;
    }
    Vec body_velocity(double) const override
    {
        return pack_velocity(Eigen::Vector3d::Zero(), {length_ / tau_, 0, 0});
    }
    Vec body_velocity_dot(double) const override { return Vec::Zero(6); }

private:
    double length_, tau_;
};

class CircleCurve final : public ReferenceCurve {
public:
    CircleCurve(double radius, double pitch, double duration)
        : radius_(radius), pitch_(pitch), tau_(duration)
    {
        if (duration <= 0.0)
            throw std::invalid_argument("curve duration must be positive");
    }
    double duration() const override { return tau_; }
    Pose value(double t) const override
    {
        const double th = 2.0 * M_PI * t / tau_;
        Pose p;
        p.r = Eigen::Vector3d(radius_ * (std::cos(th) - 1.0), radius_ * std::sin(th),
                              pitch_ * t / tau_);
        return p;
    }
    Vec body_velocity(double t) const override
    {
        const double rate = 2.0 * M_PI / tau_;
        const double th = rate * t;
        return pack_velocity(Eigen::Vector3d::Zero(),
                             {-radius_ * rate * std::sin(th), radius_ * rate * std::cos(th),
                              pitch_ / tau_});
    }
    Vec body_velocity_dot(double t) const override
    {
        const double rate = 2.0 * M_PI / tau_;
        const double th = rate * t;
        return pack_velocity(Eigen::Vector3d::Zero(),
                             {-radius_ * rate * rate * std::cos(th),
                              -radius_ * rate * rate * std::sin(th), 0.0});
    }

private:
    double radius_, pitch_, tau_;
};

class SlewCurve final : public ReferenceCurve {
public:
    SlewCurve(const Eigen::Vector3d& axis, double angle, double duration)
        : axis_(axis.normalized()), angle_(angle), tau_(duration)
    {
        if (duration <= 0.0)
            throw std::invalid_argument("curve duration must be positive");
        if (axis.norm() == 0.0)
            throw std::invalid_argument("slew axis must be nonzero");
    }
    double duration() const override { return tau_; }
    Pose value(double t) const override
    {
        Pose p;
        p.A = rot_exp(axis_ * (angle_ * t / tau_));
        return p;
    }
    Vec body_velocity(double) const override
    {
        return pack_velocity(axis_ * (angle_ / tau_), Eigen::Vector3d::Zero());
    }
    Vec body_velocity_dot(double) const override { return Vec::Zero(6); }

private:
    Eigen::Vector3d axis_;
    double angle_, tau_;
};

// Cubic Hermite basis on s in [0, 1].
struct HermiteWeights {
    double h00, h10, h01, h11;   // value weights
    double d00, d10, d01, d11;   // derivative weights (d/ds)
};

HermiteWeights hermite(double s)
{
    HermiteWeights w;
    w.h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    w.h10 = s * (1 - s) * (1 - s);
    w.h01 = s * s * (3 - 2 * s);
    w.h11 = s * s * (s - 1);
    w.d00 = 6 * s * (s - 1);
    w.d10 = (1 - s) * (1 - 3 * s);
    w.d01 = 6 * s * (1 - s);
    w.d11 = s * (3 * s - 2);
    return w;
}

class WaypointCurve final : public ReferenceCurve {
public:
    explicit WaypointCurve(std::vector<Waypoint> pts) : pts_(std::move(pts))
    {
        const int n = static_cast<int>(pts_.size());
        if (n < 2)
            throw std::invalid_argument("waypoint curve needs at least two samples");
        for (int i = 1; i < n; ++i)
            if (!(pts_[i].t > pts_[i - 1].t))
                throw std::invalid_argument("waypoint times must be strictly increasing");
        if (pts_.front().t != 0.0)
            throw std::invalid_argument("waypoint curve must start at t = 0");
        for (const auto& p : pts_)
            validate_attitude(p.pose.A, 1e-8);

        // Per-point velocities: user-supplied where present, Catmull-Rom
        // estimates otherwise.
        rdot_.resize(n);
        omega_.resize(n);
        for (int i = 0; i < n; ++i) {
            if (pts_[i].has_velocity) {
                rdot_[i] = pts_[i].rdot;
                omega_[i] = pts_[i].omega;
                continue;
            }
            const int lo = std::max(0, i - 1);
            const int hi = std::min(n - 1, i + 1);
            const double dt = pts_[hi].t - pts_[lo].t;
            rdot_[i] = (pts_[hi].pose.r - pts_[lo].pose.r) / dt;
            omega_[i] = rot_log(pts_[lo].pose.A.transpose() * pts_[hi].pose.A) / dt;
        }
        // Per-segment rotation increment and Hermite endpoint slopes for theta(s),
        // chosen so the body angular velocity is continuous at the joints.
        seg_delta_.resize(n - 1);
        seg_theta0_.resize(n - 1);
        seg_theta1_.resize(n - 1);
        for (int i = 0; i + 1 < n; ++i) {
            const double dt = pts_[i + 1].t - pts_[i].t;
            seg_delta_[i] = rot_log(pts_[i].pose.A.transpose() * pts_[i + 1].pose.A);
            seg_theta0_[i] = omega_[i] * dt; // J_r(0) = I
            seg_theta1_[i] =
                rot_right_jacobian(seg_delta_[i]).inverse() * (omega_[i + 1] * dt);
        }
    }

    double duration() const override { return pts_.back().t; }

    Pose value(double t) const override
    {
        const auto [i, s, dt] = locate(t);
        const HermiteWeights w = hermite(s);
        Pose p;
        p.r = w.h00 * pts_[i].pose.r + w.h10 * dt * rdot_[i] + w.h01 * pts_[i + 1].pose.r +
              w.h11 * dt * rdot_[i + 1];
        const Eigen::Vector3d theta = w.h10 * seg_theta0_[i] + w.h01 * seg_delta_[i] +
                                      w.h11 * seg_theta1_[i];
        p.A = pts_[i].pose.A * rot_exp(theta);
        return p;
    }

    Vec body_velocity(double t) const override
    {
        const auto [i, s, dt] = locate(t);
        const HermiteWeights w = hermite(s);
        const Eigen::Vector3d rdot =
            (w.d00 * pts_[i].pose.r + w.d10 * dt * rdot_[i] + w.d01 * pts_[i + 1].pose.r +
             w.d11 * dt * rdot_[i + 1]) /
            dt;
        const Eigen::Vector3d theta = w.h10 * seg_theta0_[i] + w.h01 * seg_delta_[i] +
                                      w.h11 * seg_theta1_[i];
        const Eigen::Vector3d theta_dot =
            (w.d10 * seg_theta0_[i] + w.d01 * seg_delta_[i] + w.d11 * seg_theta1_[i]) / dt;
        const Eigen::Matrix3d a = pts_[i].pose.A * rot_exp(theta);
        const Eigen::Vector3d omega = rot_right_jacobian(theta) * theta_dot;
        return pack_velocity(omega, a.transpose() * rdot);
    }

private:
    std::tuple<int, double, double> locate(double t) const
    {
        const double tt = std::clamp(t, 0.0, duration());
        int i = static_cast<int>(std::upper_bound(pts_.begin(), pts_.end(), tt,
                                                  [](double v, const Waypoint& w) {
                                                      return v < w.t;
                                                  }) -
                                 pts_.begin()) -
                1;
        i = std::clamp(i, 0, static_cast<int>(pts_.size()) - 2);
        const double dt = pts_[i + 1].t - pts_[i].t;
        return {i, (tt - pts_[i].t) / dt, dt};
    }

    std::vector<Waypoint> pts_;
    std::vector<Eigen::Vector3d> rdot_, omega_;
    std::vector<Eigen::Vector3d> seg_delta_, seg_theta0_, seg_theta1_;
};

} // namespace

CurvePtr make_line(double length, double duration)
{
    return std::make_shared<LineCurve>(length, duration);
}

CurvePtr make_circle(double radius, double duration)
{
    return std::make_shared<CircleCurve>(radius, 0.0, duration);
}

CurvePtr make_helix(double radius, double pitch, double duration)
{
    return std::make_shared<CircleCurve>(radius, pitch, duration);
}

CurvePtr make_attitude_slew(const Eigen::Vector3d& axis, double angle, double duration)
{
    return std::make_shared<SlewCurve>(axis, angle, duration);
}

double c1_defect(const ReferenceCurve& curve, const std::vector<double>& joints)
{
    double worst = 0.0;
    const double h = 1e-7 * curve.duration();
    for (double tj : joints) {
        if (tj <= 0.0 || tj >= curve.duration())
            continue;
        const Pose before = curve.value(tj - h);
        const Pose after = curve.value(tj + h);
        worst = std::max(worst, se3_distance(before, after));
        const Vec dv = curve.body_velocity(tj + h) - curve.body_velocity(tj - h);
        worst = std::max(worst, dv.norm());
    }
    return worst;
}

CurvePtr make_waypoint_curve(std::vector<Waypoint> points, double c1_tol)
{
    std::vector<double> joints;
    joints.reserve(points.size());
    for (const Waypoint& w : points)
        joints.push_back(w.t);
    auto curve = std::make_shared<WaypointCurve>(std::move(points));
    const double defect = c1_defect(*curve, joints);
    if (defect > c1_tol)
        throw std::invalid_argument("waypoint curve violates C1 continuity at a joint (defect " +
                                    std::to_string(defect) + ")");
    return curve;
}

CurvePtr make_trajectory_curve(const MechSystemT<double>& sys, const Trajectory& traj,
                               int stride)
{
    if (traj.size() < 2)
        throw std::invalid_argument("trajectory curve needs at least two samples");
    if (stride < 1)
        throw std::invalid_argument("trajectory curve stride must be positive");
    const double t0 = traj.times.front();
    std::vector<Waypoint> pts;
    for (std::size_t i = 0; i < traj.size(); i += static_cast<std::size_t>(stride)) {
        const GroupState& s = traj.states[i];
        Vec impulse(6);
        impulse << s.Pi, s.P;
        const Vec xi = sys.inertia().inverse() * impulse;
        Waypoint w;
        w.t = traj.times[i] - t0;
        w.pose = s.pose();
        w.has_velocity = true;
        w.omega = xi.head<3>();
        w.rdot = s.A * xi.tail<3>();
        pts.push_back(w);
    }
    if ((traj.size() - 1) % static_cast<std::size_t>(stride) != 0) {
        const GroupState& s = traj.states.back();
        Vec impulse(6);
        impulse << s.Pi, s.P;
        const Vec xi = sys.inertia().inverse() * impulse;
        Waypoint w;
        w.t = traj.times.back() - t0;
        w.pose = s.pose();
        w.has_velocity = true;
        w.omega = xi.head<3>();
        w.rdot = s.A * xi.tail<3>();
        pts.push_back(w);
    }
    return make_waypoint_curve(std::move(pts));
}

} // namespace symtrack
