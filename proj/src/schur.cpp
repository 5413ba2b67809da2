#include <floquetcm/schur.hpp>

#include <lapacke.h>

#include <algorithm>

namespace fcm {

namespace {

struct RealSchur {
    Mat T, Z;
    std::vector<double> wr, wi;
};

RealSchur real_schur(const Mat& M) {
    const lapack_int n = static_cast<lapack_int>(M.rows());
    RealSchur rs;
    rs.T = M;
    rs.Z.resize(n, n);
    rs.wr.resize(n);
    rs.wi.resize(n);
    lapack_int sdim = 0;
    lapack_int info = LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', 'N', nullptr, n, rs.T.data(), n, &sdim,
                                    rs.wr.data(), rs.wi.data(), rs.Z.data(), n);
    if (info != 0) throw NumericalError("real Schur decomposition failed (dgees info " + std::to_string(info) + ")");
    return rs;
}

// Called directly: some LAPACKE builds mishandle the workspace query for dtrsen.
extern "C" void dtrsen_(const char* job, const char* compq, const lapack_logical* select,
                        const lapack_int* n, double* t, const lapack_int* ldt, double* q,
                        const lapack_int* ldq, double* wr, double* wi, lapack_int* m, double* s,
                        double* sep, double* work, const lapack_int* lwork, lapack_int* iwork,
                        const lapack_int* liwork, lapack_int* info, std::size_t job_len,
                        std::size_t compq_len);

}  // namespace

std::vector<std::complex<double>> eigenvalues(const Mat& M) {
    if (M.rows() != M.cols()) throw UsageError("matrix must be square");
    if (!M.allFinite()) throw NumericalError("matrix has non-finite entries");
    if (M.rows() == 0) return {};
    auto rs = real_schur(M);
    std::vector<std::complex<double>> ev;
    for (std::size_t i = 0; i < rs.wr.size(); ++i) ev.emplace_back(rs.wr[i], rs.wi[i]);
    return ev;
}

InvariantSubspace invariant_subspace(const Mat& M,
                                     const std::function<bool(std::complex<double>)>& select) {
    if (M.rows() != M.cols()) throw UsageError("matrix must be square");
    if (!M.allFinite()) throw NumericalError("matrix has non-finite entries");
    const lapack_int n = static_cast<lapack_int>(M.rows());
    if (n == 0) return {Mat(0, 0), Mat(0, 0)};
    auto rs = real_schur(M);
    std::vector<lapack_logical> sel(n);
    int count = 0;
    for (lapack_int i = 0; i < n; ++i) {
        sel[i] = select({rs.wr[i], rs.wi[i]}) ? 1 : 0;
        count += sel[i];
    }
    // Keep complex pairs together even if the selector is asymmetric.
    for (lapack_int i = 0; i + 1 < n; ++i) {
        if (rs.wi[i] != 0.0 && rs.wi[i] == -rs.wi[i + 1]) {
            lapack_logical both = sel[i] || sel[i + 1];
            count += (both - sel[i]) + (both - sel[i + 1]);
            sel[i] = sel[i + 1] = both;
            ++i;
        }
    }
    if (count == 0) return {Mat(n, 0), Mat(0, 0)};
    lapack_int m = 0;
    double s = 0, sep = 0;
    const char job = 'N', compq = 'V';
    std::vector<double> work(std::max<lapack_int>(1, n));
    lapack_int lwork = static_cast<lapack_int>(work.size()), iwork = 0, liwork = 1, info = 0;
    dtrsen_(&job, &compq, sel.data(), &n, rs.T.data(), &n, rs.Z.data(), &n, rs.wr.data(),
            rs.wi.data(), &m, &s, &sep, work.data(), &lwork, &iwork, &liwork, &info, 1, 1);
    if (info != 0) throw NumericalError("Schur reordering failed (dtrsen info " + std::to_string(info) + ")");
    return {rs.Z.leftCols(m), rs.T.topLeftCorner(m, m)};
}

}  // namespace fcm
