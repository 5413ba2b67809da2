#pragma once

#include <floquetcm/integrate.hpp>
#include <floquetcm/odecore.hpp>
#include <floquetcm/schur.hpp>

#include <array>
#include <complex>
#include <memory>
#include <string>
#include <vector>

namespace fcm {

using cplx = std::complex<double>;

enum class Band { Stable = 0, Center = 1, Unstable = 2 };
std::string to_string(Band b);

constexpr double kDefaultRhoTol = 1e-6;
// Eigenvalues closer than this (relative to max(1,|lambda|)) are one multiplier.
constexpr double kClusterTol = 1e-6;

Band band_of(cplx lambda, double rho_tol);

struct Multiplier {
    cplx value;
    int multiplicity = 1;
    Band band = Band::Center;
};

struct FloquetSpectrum {
    int dim = 0;
    double rho_tol = kDefaultRhoTol;
    std::vector<Multiplier> multipliers;  // sorted by modulus, then argument
    bool has_trivial = false;
    std::vector<std::string> warnings;

    int count(Band b) const;
    int center_dim() const { return count(Band::Center); }
    bool nonhyperbolic() const { return center_dim() >= 2; }
    // Every eigenvalue repeated by multiplicity, same ordering.
    std::vector<cplx> expanded() const;
};

// U(s+T, s).
Mat monodromy(const TransitionMatrix& U, double s);

FloquetSpectrum classify(const Mat& M, double rho_tol = kDefaultRhoTol);

class SpectralProjectors {
public:
    SpectralProjectors() = default;
    SpectralProjectors(std::shared_ptr<const TransitionMatrix> U, const FloquetSpectrum& spec,
                       const std::vector<double>& grid);

    int dim() const { return dim_; }
    double base() const { return s_; }
    double period() const { return U_->period(); }
    const TransitionMatrix& transition() const { return *U_; }
    std::shared_ptr<const TransitionMatrix> transition_ptr() const { return U_; }

    const Mat& at_base(Band b) const { return base_[static_cast<int>(b)]; }
    const InvariantSubspace& subspace(Band b) const { return sub_[static_cast<int>(b)]; }
    int rank(Band b) const { return static_cast<int>(sub_[static_cast<int>(b)].basis.cols()); }

    // pi_b(t) = U(t,s) pi_b(s) U(t,s)^{-1}, evaluated on the composite basis.
    Mat at(Band b, double t) const;
    std::array<Mat, 3> all_at(double t) const;
    // U(t,s) pi_b(s) through powers of the restricted monodromy block.
    Mat restricted(Band b, double t) const;

    double bound() const { return N_; }  // sup over grid of the summed norms
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    Mat U_within(double t) const;

    std::shared_ptr<const TransitionMatrix> U_;
    int dim_ = 0;
    double s_ = 0;
    std::array<InvariantSubspace, 3> sub_;
    Mat X_;      // [X- | X0 | X+]
    Mat Yt_;     // X^{-1}
    std::array<Mat, 3> base_;
    std::array<int, 3> offset_{};
    double N_ = 0;
    std::vector<double> grid_;
    std::vector<std::string> warnings_;
};

SpectralProjectors projectors(const TransitionMatrix& U, const FloquetSpectrum& spec,
                              const std::vector<double>& grid);

// grid of `count` equally spaced points over [s, s+T).
std::vector<double> period_grid(double s, double T, int count);

struct BundleBasis {
    std::shared_ptr<const TransitionMatrix> U;
    double s = 0;
    Mat basis_s;                      // columns span E(s)
    std::vector<double> grid;
    std::vector<Mat> values;          // zeta(t) at grid points
    double min_singular = 0;          // smallest over grid, columns normalized
    bool ill_conditioned = false;     // condition number above 1e8 somewhere

    Mat at(double t) const;
};

// group: multiplier values; each eigenvalue within the cluster tolerance of one of
// them is included. Throws UsageError unless the group is closed under conjugation.
BundleBasis bundle_basis(const TransitionMatrix& U, const FloquetSpectrum& spec,
                         const std::vector<cplx>& group, double s, const std::vector<double>& grid);
BundleBasis bundle_from_vectors(const TransitionMatrix& U, const Mat& Z_s, double s,
                                const std::vector<double>& grid);

struct TrichotomyEstimate {
    double a = 0, b = 0;                // reported rates (+-infinity when empty)
    double a_spectral = 0, b_spectral = 0;
    double a_fit = 0, b_fit = 0;
    double eps = 0;                      // center growth bound
    double C = 1;
    double residual_a = 0, residual_b = 0, residual_eps = 0;  // rms of the log fits
    bool bounds_hold = true;
    std::vector<double> grid;
};

// Grid spanning [s - periods T, s + periods T].
std::vector<double> trichotomy_grid(double s, double T, int periods = 3, int per_period = 32);

TrichotomyEstimate trichotomy_fit(const SpectralProjectors& P, const FloquetSpectrum& spec,
                                  const std::vector<double>& grid);

struct NormalForm {
    Mat B;
    bool doubled = false;
    double s = 0;
    std::shared_ptr<const TransitionMatrix> U;
    Mat Q(double t) const;  // U(t,s) exp(-B (t-s))
};

NormalForm floquet_normal_form(const TransitionMatrix& U, double s);

// Everything derived from the linearization about a cycle.
struct FloquetAnalysis {
    TranslatedSystem system;
    std::shared_ptr<const TransitionMatrix> U;
    FloquetSpectrum spectrum;
    SpectralProjectors projectors;
    TrichotomyEstimate rates;
};

FloquetAnalysis analyze(const TranslatedSystem& sys, const StepperConfig& cfg = {},
                        double rho_tol = kDefaultRhoTol, double s = 0.0);
// Uses the augmented variational equation when the cycle is sampled.
FloquetAnalysis analyze(const System& sys, const StepperConfig& cfg = {},
                        double rho_tol = kDefaultRhoTol, double s = 0.0);

}  // namespace fcm
