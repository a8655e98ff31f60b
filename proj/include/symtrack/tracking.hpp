#pragma once

#include "symtrack/closure.hpp"
#include "symtrack/curves.hpp"
#include "symtrack/dynamics.hpp"
#include "symtrack/signals.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace symtrack {

/// A synthesis stage could not realize its input; stage() identifies which.
class SynthesisError : public std::runtime_error {
public:
    SynthesisError(std::string stage, const std::string& what, double residual = 0.0)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)),
          residual_(residual)
    {
    }
    const std::string& stage() const { return stage_; }
    double residual() const { return residual_; }

private:
    std::string stage_;
    double residual_;
};

struct TrackingParams {
    double omega_osc_hz = 16.0;     // kinematic oscillation base frequency
    double freq_separation = 10.0;  // mechanical carriers sit this factor above
                                    // the synthesized force content
    double dt = 0.0;                // integrator step; 0 = auto from frequencies
    double epsilon = std::numeric_limits<double>::infinity(); // demanded tolerance
    int envelope_degree = 32;       // Chebyshev degree for coefficient profiles
    double decomposition_tol = 1e-5; // relative residual gate for both stages
    int record_samples = 4000;      // max recorded trajectory samples
    int oversample = 24;            // integration points per fastest period
    int l_max = 3;                  // analyzer depth for the admissibility gate
};

/// Velocity target for the kinematic stage, given as the body velocity of the
/// reference at each time.
using VelocityFn = std::function<Vec(double)>;

/// Stage-1 synthesis result: oscillatory controls on the generator channels,
/// plus the smooth extended-system decomposition it realizes.
struct KinematicPlan {
    std::vector<Vec> fields;        // generator fields X_a (channel order)
    ControlSignal controls;         // per-channel signals, oscillations included
    std::vector<Vec> bracket_fields;          // chosen bracket directions
    std::vector<std::pair<int, int>> bracket_pairs; // channel pairs per bracket
    std::vector<ModulatedSignal> direct_coeffs;     // w_a on the generators
    std::vector<ModulatedSignal> bracket_coeffs;    // w_j on the brackets
    double fit_residual = 0.0;      // decomposition + interpolation residual
    bool uses_oscillation = false;
    double duration = 0.0;
};

/// Liu-Sussmann-style realization: decomposes the target velocity over the
/// generators and their pairwise brackets, then produces each needed bracket
/// direction with a sinusoidal pair at a distinct multiple of the base
/// frequency. Throws SynthesisError when the velocity leaves the span of the
/// depth-2 extended family.
KinematicPlan kinematic_synthesis(const LieAlgebra& g, const std::vector<Vec>& fields,
                                  const VelocityFn& xi_ref, double duration,
                                  double omega_osc_hz, const TrackingParams& params = {});

/// Integrates the control-linear flow g' = g (sum_a u_a(t) X_a) on SE(3) with
/// a 4th-order Munthe-Kaas step. Returns poses at the recorded grid.
std::vector<Pose> kinematic_flow_se3(const LieAlgebra& g, const std::vector<Vec>& fields,
                                     const ControlSignal& controls, const Pose& start,
                                     double t_final, double dt, int record_stride = 1,
                                     std::vector<double>* times_out = nullptr);

/// Integrates the same flow in exponential coordinates of the first kind,
/// theta' = dexpinv_theta(xi). Exact chart for nilpotent algebras; used by the
/// planar-bracket toy checks.
std::vector<Vec> flow_exponential_coords(const LieAlgebra& g, const VelocityFn& xi,
                                         double t_final, double dt,
                                         std::vector<double>* times_out = nullptr);

/// Stage-2 synthesis: realizes the covariant acceleration of the stage-1
/// velocity profile on the physical channels. Direct components feed the
/// matching channels; symmetric-product components are produced by zero-mean
/// sinusoidal pairs whose averaged effect injects the product direction.
struct MechanicalPlan {
    ControlSignal controls;                   // physical channels
    std::vector<ModulatedSignal> xi_profile;  // stage-1 body velocity, per component
    double fit_residual = 0.0;
    bool uses_oscillation = false;
    double carrier_hz = 0.0;                  // base mechanical carrier frequency
};

MechanicalPlan mechanical_synthesis(const MechSystem& sys, const KinematicPlan& kin,
                                    const TrackingParams& params = {});

struct StageResiduals {
    double kinematic_fit = 0.0;  // stage-1 decomposition residual
    double mechanical_fit = 0.0; // stage-2 force decomposition residual
    double stage1_error = 0.0;   // max distance gamma_ref vs the kinematic flow
};

struct TrackResult {
    ControlSignal controls;
    Trajectory realized;
    std::vector<double> error_profile; // distance to the reference per sample
    double max_error = 0.0;
    bool within_epsilon = false;
    bool velocity_matched = false; // strong-tracking initial condition achieved
    double omega_osc_hz = 0.0;
    double dt = 0.0;
    StageResiduals residuals;
};

/// Full pipeline: admissibility gate, direct realization when the reference
/// is itself admissible, otherwise the two-stage oscillatory construction,
/// then simulation from the reference's exact initial configuration.
TrackResult track(const MechSystem& sys, const ReferenceCurve& curve,
                  const TrackingParams& params = {});

/// Frequency sweep: runs track() at omega, 2 omega, ..., 2^(n-1) omega.
std::vector<TrackResult> track_sweep(const MechSystem& sys, const ReferenceCurve& curve,
                                     const TrackingParams& params, int runs,
                                     int max_threads = 0);

} // namespace symtrack
