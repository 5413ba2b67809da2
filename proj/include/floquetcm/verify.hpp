#pragma once

#include <floquetcm/floquet.hpp>
#include <floquetcm/integrate.hpp>
#include <floquetcm/problem.hpp>

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace fcm {

struct ConservedQuantity {
    std::string id;
    std::function<double(const Vec&)> V;  // throws DomainError off its domain
    double level = 0;
};

// x1^2 + x2^2 - 1 for the cylinder system.
ConservedQuantity cylinder_invariant();
// Torus family of the sigma = 0 Mobius system, zero on T_l.
ConservedQuantity torus_invariant(double l);

double drift(const ConservedQuantity& q, const Trajectory& traj);

// Outer root u* >= 1 of V_l(u, 0, 0) = 0, returned as the point (u*, 0, 0).
Vec torus_root(double l);

struct SurfacePoint {
    double t, v;
    Vec x;
};

struct SurfaceGrid {
    std::vector<SurfacePoint> points;
    void write_csv(std::ostream& os) const;  // t,v,x1,x2,x3
};

// gamma(t) + v zeta(t) over t in [t0, t1] and v in [v0, v1].
SurfaceGrid ruled_surface(const CycleOrbit& cycle, const BundleBasis& basis, double t0, double t1,
                          int nt, double v0, double v1, int nv);
// Distance between (t, v) and (t + T, -v) on the ruled surface.
double seam_error(const CycleOrbit& cycle, const BundleBasis& basis, double t, double v);

struct Measurement {
    std::string name;
    double value = 0;
    double tolerance = 0;
    bool pass = false;
};

struct CheckResult {
    std::string id;
    std::string status = "fail";  // pass, fail or error
    double value = 0;             // primary measurement
    double tolerance = 0;
    std::string message;
    std::vector<Measurement> measurements;
    // Extra structured output (multipliers, coefficients, ...), already JSON text.
    std::string data;
    bool passed() const { return status == "pass"; }
};

struct VerificationReport {
    std::string system;
    Params params;
    std::vector<CheckResult> checks;
    bool pass() const;
};

VerificationReport run_suite(const ProblemSpec& spec, const std::vector<std::string>& checks,
                             std::uint64_t seed = 0);

// Preset bundles per worked example; one report per parameter setting.
const std::vector<std::string>& example_ids();
std::vector<VerificationReport> reproduce(const std::string& example_id, std::uint64_t seed = 0);

// Sorted keys, deterministic.
std::string report_json(const std::vector<VerificationReport>& reports, const std::string& label = "");

}  // namespace fcm
