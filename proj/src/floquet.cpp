#include <floquetcm/floquet.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fcm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double spectral_norm(const Mat& A) {
    if (A.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Mat>(A).singularValues()(0);
}

bool order_less(cplx a, cplx b) {
    double ma = std::abs(a), mb = std::abs(b);
    if (std::abs(ma - mb) > 1e-12 * std::max(1.0, ma)) return ma < mb;
    return std::arg(a) < std::arg(b);
}

std::string format_cplx(cplx z) {
    std::ostringstream os;
    os.precision(10);
    os << z.real();
    if (z.imag() != 0) os << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
    return os.str();
}

struct LineFit {
    double slope = 0, intercept = 0, rms = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit f;
    const double n = static_cast<double>(x.size());
    if (x.size() < 2) return f;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    f.slope = sxx > 0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - f.intercept - f.slope * x[i];
        ss += r * r;
    }
    f.rms = std::sqrt(ss / n);
    return f;
}

}  // namespace

std::string to_string(Band b) {
    switch (b) {
        case Band::Stable: return "stable";
        case Band::Center: return "center";
        default: return "unstable";
    }
}

Band band_of(cplx lambda, double rho_tol) {
    double m = std::abs(lambda);
    if (m <= 1.0 - rho_tol) return Band::Stable;
    if (m >= 1.0 + rho_tol) return Band::Unstable;
    return Band::Center;
}

int FloquetSpectrum::count(Band b) const {
    int c = 0;
    for (const auto& m : multipliers)
        if (m.band == b) c += m.multiplicity;
    return c;
}

std::vector<cplx> FloquetSpectrum::expanded() const {
    std::vector<cplx> out;
    for (const auto& m : multipliers)
        for (int i = 0; i < m.multiplicity; ++i) out.push_back(m.value);
    return out;
}

Mat monodromy(const TransitionMatrix& U, double s) {
    if (s == U.base()) return U.monodromy();
    return U.between(s + U.period(), s);
}

FloquetSpectrum classify(const Mat& M, double rho_tol) {
    if (M.rows() != M.cols() || M.rows() == 0) throw UsageError("monodromy must be square");
    if (!(rho_tol > 0 && rho_tol < 1)) throw UsageError("rho_tol must lie in (0, 1)");
    auto ev = eigenvalues(M);
    std::sort(ev.begin(), ev.end(), order_less);

    std::vector<std::vector<cplx>> clusters;
    for (cplx z : ev) {
        bool placed = false;
        for (auto& c : clusters) {
            if (std::abs(c.front() - z) <= kClusterTol * std::max(1.0, std::abs(z))) {
                c.push_back(z);
                placed = true;
                break;
            }
        }
        if (!placed) clusters.push_back({z});
    }

    FloquetSpectrum spec;
    spec.dim = static_cast<int>(M.rows());
    spec.rho_tol = rho_tol;
    for (const auto& c : clusters) {
        cplx mean = 0;
        for (cplx z : c) mean += z;
        mean /= static_cast<double>(c.size());
        if (std::abs(mean.imag()) <= kClusterTol * std::max(1.0, std::abs(mean)) && c.size() > 1)
            mean = mean.real();
        spec.multipliers.push_back({mean, static_cast<int>(c.size()), band_of(mean, rho_tol)});
    }
    std::sort(spec.multipliers.begin(), spec.multipliers.end(),
              [](const Multiplier& a, const Multiplier& b) { return order_less(a.value, b.value); });

    const double trivial_tol = std::max(rho_tol, kClusterTol);
    for (const auto& m : spec.multipliers) {
        if (std::abs(m.value - 1.0) <= trivial_tol) spec.has_trivial = true;
        double d = std::abs(std::abs(m.value) - 1.0);
        if (d > 0.5 * rho_tol && d < 3.0 * rho_tol)
            spec.warnings.push_back("multiplier " + format_cplx(m.value) +
                                    " is within 3 rho_tol of the unit circle");
    }
    if (!spec.has_trivial) spec.warnings.push_back("trivial multiplier 1 not detected");
    return spec;
}

std::vector<double> period_grid(double s, double T, int count) {
    std::vector<double> g(count);
    for (int k = 0; k < count; ++k) g[k] = s + T * k / count;
    return g;
}

SpectralProjectors::SpectralProjectors(std::shared_ptr<const TransitionMatrix> U,
                                       const FloquetSpectrum& spec,
                                       const std::vector<double>& grid)
    : U_(std::move(U)), dim_(U_->dim()), s_(U_->base()), grid_(grid) {
    const Mat& M = U_->monodromy();
    int total = 0;
    for (int b = 0; b < 3; ++b) {
        sub_[b] = invariant_subspace(M, [&](cplx z) {
            return static_cast<int>(band_of(z, spec.rho_tol)) == b;
        });
        offset_[b] = total;
        total += static_cast<int>(sub_[b].basis.cols());
    }
    if (total != dim_) throw NumericalError("invariant subspaces do not span the state space");
    X_.resize(dim_, dim_);
    for (int b = 0; b < 3; ++b) X_.middleCols(offset_[b], sub_[b].basis.cols()) = sub_[b].basis;
    Eigen::PartialPivLU<Mat> lu(X_);
    Yt_ = lu.inverse();
    for (int b = 0; b < 3; ++b) {
        const int r = static_cast<int>(sub_[b].basis.cols());
        base_[b] = sub_[b].basis * Yt_.middleRows(offset_[b], r);
    }
    double cond = spectral_norm(X_) * spectral_norm(Yt_);
    if (cond > 1e8)
        warnings_.push_back("spectral subspaces are nearly parallel (condition " +
                            std::to_string(cond) + ")");
    for (const auto& w : spec.warnings) warnings_.push_back(w);
    N_ = 0;
    for (double t : grid_) {
        auto P = all_at(t);
        N_ = std::max(N_, spectral_norm(P[0]) + spectral_norm(P[1]) + spectral_norm(P[2]));
    }
    if (grid_.empty())
        N_ = spectral_norm(base_[0]) + spectral_norm(base_[1]) + spectral_norm(base_[2]);
}

Mat SpectralProjectors::U_within(double t) const {
    const double T = U_->period();
    double r = std::fmod(t - s_, T);
    if (r < 0) r += T;
    return (*U_)(s_ + r);
}

std::array<Mat, 3> SpectralProjectors::all_at(double t) const {
    Mat W = U_within(t) * X_;
    for (int j = 0; j < dim_; ++j) {
        double nrm = W.col(j).norm();
        if (nrm > 0) W.col(j) /= nrm;
    }
    Mat Wi = W.partialPivLu().inverse();
    std::array<Mat, 3> out;
    for (int b = 0; b < 3; ++b) {
        const int r = static_cast<int>(sub_[b].basis.cols());
        out[b] = W.middleCols(offset_[b], r) * Wi.middleRows(offset_[b], r);
    }
    return out;
}

Mat SpectralProjectors::at(Band b, double t) const { return all_at(t)[static_cast<int>(b)]; }

Mat SpectralProjectors::restricted(Band band, double t) const {
    const int b = static_cast<int>(band);
    const int r = static_cast<int>(sub_[b].basis.cols());
    if (r == 0) return Mat::Zero(dim_, dim_);
    const double T = U_->period();
    double kf = std::floor((t - s_) / T);
    double tau = t - s_ - kf * T;
    if (tau >= T) {
        tau -= T;
        kf += 1;
    }
    const long k = static_cast<long>(kf);
    Mat Z = (*U_)(s_ + tau) * sub_[b].basis;
    Mat Tk = Mat::Identity(r, r);
    if (k > 0) {
        for (long i = 0; i < k; ++i) Tk = Tk * sub_[b].block;
    } else if (k < 0) {
        Mat Tinv = sub_[b].block.partialPivLu().inverse();
        for (long i = 0; i < -k; ++i) Tk = Tk * Tinv;
    }
    return Z * Tk * Yt_.middleRows(offset_[b], r);
}

SpectralProjectors projectors(const TransitionMatrix& U, const FloquetSpectrum& spec,
                              const std::vector<double>& grid) {
    return SpectralProjectors(std::make_shared<const TransitionMatrix>(U), spec, grid);
}

Mat BundleBasis::at(double t) const { return U->between(t, s) * basis_s; }

BundleBasis bundle_from_vectors(const TransitionMatrix& U, const Mat& Z_s, double s,
                                const std::vector<double>& grid) {
    if (Z_s.rows() != U.dim() || Z_s.cols() < 1) throw UsageError("basis has wrong shape");
    BundleBasis B;
    B.U = std::make_shared<const TransitionMatrix>(U);
    B.s = s;
    B.basis_s = Z_s;
    B.grid = grid;
    B.min_singular = std::numeric_limits<double>::infinity();
    for (double t : grid) {
        Mat Z = B.at(t);
        B.values.push_back(Z);
        Mat Zn = Z;
        for (int j = 0; j < Zn.cols(); ++j) Zn.col(j).normalize();
        auto sv = Eigen::JacobiSVD<Mat>(Zn).singularValues();
        double smin = sv(sv.size() - 1);
        B.min_singular = std::min(B.min_singular, smin);
        if (smin <= 0 || sv(0) / smin > 1e8) B.ill_conditioned = true;
    }
    return B;
}

BundleBasis bundle_basis(const TransitionMatrix& U, const FloquetSpectrum& spec,
                         const std::vector<cplx>& group, double s,
                         const std::vector<double>& grid) {
    if (group.empty()) throw UsageError("multiplier group is empty");
    const double tol = std::max(kClusterTol, spec.rho_tol);
    auto in_group = [&](cplx z) {
        for (cplx g : group)
            if (std::abs(z - g) <= tol * std::max(1.0, std::abs(g))) return true;
        return false;
    };
    for (cplx g : group)
        if (!in_group(std::conj(g))) throw UsageError("multiplier group is not closed under conjugation");
    auto sub = invariant_subspace(monodromy(U, s), in_group);
    if (sub.basis.cols() == 0) throw UsageError("no multiplier of the monodromy matches the group");
    // Deterministic orientation: largest entry of each column positive.
    for (int j = 0; j < sub.basis.cols(); ++j) {
        Eigen::Index i;
        sub.basis.col(j).cwiseAbs().maxCoeff(&i);
        if (sub.basis(i, j) < 0) sub.basis.col(j) *= -1;
    }
    return bundle_from_vectors(U, sub.basis, s, grid);
}

std::vector<double> trichotomy_grid(double s, double T, int periods, int per_period) {
    std::vector<double> g;
    const int n = periods * per_period;
    for (int k = -n; k <= n; ++k) g.push_back(s + T * k / per_period);
    return g;
}

TrichotomyEstimate trichotomy_fit(const SpectralProjectors& P, const FloquetSpectrum& spec,
                                  const std::vector<double>& grid) {
    const double s = P.base(), T = P.period();
    double lo = s, hi = s;
    for (double t : grid) {
        lo = std::min(lo, t);
        hi = std::max(hi, t);
    }
    if (hi - lo < 3 * T * (1 - 1e-9)) throw UsageError("trichotomy grid must span at least 3 periods");

    TrichotomyEstimate est;
    est.grid = grid;
    est.a_spectral = -kInf;
    est.b_spectral = kInf;
    for (const auto& m : spec.multipliers) {
        double r = std::log(std::abs(m.value)) / T;
        if (m.band == Band::Stable) est.a_spectral = std::max(est.a_spectral, r);
        if (m.band == Band::Unstable) est.b_spectral = std::min(est.b_spectral, r);
    }

    struct Sample {
        double dt, norm;
    };
    std::array<std::vector<Sample>, 3> samples;
    for (double t : grid) {
        for (int b = 0; b < 3; ++b) {
            if (P.rank(static_cast<Band>(b)) == 0) continue;
            if (b == 0 && t < s) continue;
            if (b == 2 && t > s) continue;
            samples[b].push_back({t - s, spectral_norm(P.restricted(static_cast<Band>(b), t))});
        }
    }
    auto fit = [](const std::vector<Sample>& v, bool absolute) {
        std::vector<double> x, y;
        for (const auto& smp : v) {
            if (!(smp.norm > 0)) continue;
            x.push_back(absolute ? std::abs(smp.dt) : smp.dt);
            y.push_back(std::log(smp.norm));
        }
        return fit_line(x, y);
    };

    est.a = est.a_fit = -kInf;
    if (!samples[0].empty()) {
        auto f = fit(samples[0], false);
        est.a_fit = f.slope;
        est.residual_a = f.rms;
        est.a = std::max(est.a_spectral, est.a_fit);
    }
    est.b = est.b_fit = kInf;
    if (!samples[2].empty()) {
        auto f = fit(samples[2], false);
        est.b_fit = f.slope;
        est.residual_b = f.rms;
        est.b = std::min(est.b_spectral, est.b_fit);
    }
    est.eps = 0;
    if (!samples[1].empty()) {
        auto f = fit(samples[1], true);
        est.eps = std::max(0.0, f.slope);
        est.residual_eps = f.rms;
    }
    auto bound = [&](int b, double dt) {
        if (b == 0) return std::exp(est.a * dt);
        if (b == 2) return std::exp(est.b * dt);
        return std::exp(est.eps * std::abs(dt));
    };
    est.C = 0;
    for (int b = 0; b < 3; ++b)
        for (const auto& smp : samples[b]) est.C = std::max(est.C, smp.norm / bound(b, smp.dt));
    if (est.C == 0) est.C = 1;
    est.bounds_hold = true;
    for (int b = 0; b < 3; ++b)
        for (const auto& smp : samples[b])
            if (smp.norm > est.C * bound(b, smp.dt) * (1 + 1e-12)) est.bounds_hold = false;
    if ((P.rank(Band::Stable) > 0 && !(est.a < 0)) || (P.rank(Band::Unstable) > 0 && !(est.b > 0)))
        est.bounds_hold = false;
    return est;
}

Mat NormalForm::Q(double t) const {
    Mat E = (-B * (t - s)).exp();
    return U->between(t, s) * E;
}

NormalForm floquet_normal_form(const TransitionMatrix& U, double s) {
    Mat M = monodromy(U, s);
    if (!M.allFinite()) throw NumericalError("monodromy has non-finite entries");
    auto ev = eigenvalues(M);
    for (cplx z : ev)
        if (std::abs(z) < 1e-300) throw NumericalError("singular monodromy");
    NormalForm nf;
    nf.s = s;
    nf.U = std::make_shared<const TransitionMatrix>(U);
    for (cplx z : ev)
        if (z.real() < 0 && std::abs(z.imag()) <= 1e-8 * std::abs(z)) nf.doubled = true;
    const double T = U.period();
    if (nf.doubled) {
        Mat M2 = M * M;
        nf.B = M2.log() / (2 * T);
    } else {
        nf.B = M.log() / T;
    }
    if (!nf.B.allFinite()) throw NumericalError("matrix logarithm failed");
    return nf;
}

FloquetAnalysis analyze(const TranslatedSystem& sys, const StepperConfig& cfg, double rho_tol,
                        double s) {
    FloquetAnalysis fa;
    fa.system = sys;
    fa.U = std::make_shared<const TransitionMatrix>(sys.A, s, sys.period, cfg);
    fa.spectrum = classify(fa.U->monodromy(), rho_tol);
    fa.projectors = SpectralProjectors(fa.U, fa.spectrum, period_grid(s, sys.period, 64));
    fa.rates = trichotomy_fit(fa.projectors, fa.spectrum, trichotomy_grid(s, sys.period));
    return fa;
}

FloquetAnalysis analyze(const System& sys, const StepperConfig& cfg, double rho_tol, double s) {
    TranslatedSystem ts = translate(sys);
    if (!sys.cycle->sampled) return analyze(ts, cfg, rho_tol, s);
    FloquetAnalysis fa;
    fa.system = ts;
    fa.U = std::make_shared<const TransitionMatrix>(
        TransitionMatrix::along_orbit(sys.field, sys.cycle->gamma(s), s, ts.period, cfg));
    fa.spectrum = classify(fa.U->monodromy(), rho_tol);
    fa.projectors = SpectralProjectors(fa.U, fa.spectrum, period_grid(s, ts.period, 64));
    fa.rates = trichotomy_fit(fa.projectors, fa.spectrum, trichotomy_grid(s, ts.period));
    return fa;
}

}  // namespace fcm
