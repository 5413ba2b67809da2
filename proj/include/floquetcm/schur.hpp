#pragma once

#include <floquetcm/types.hpp>

#include <complex>
#include <functional>
#include <vector>

namespace fcm {

// Orthonormal basis Z of the invariant subspace of M for the selected
// eigenvalues, and the block T with M Z = Z T. Complex pairs are selected
// together since the selector sees both members.
struct InvariantSubspace {
    Mat basis;
    Mat block;
};

InvariantSubspace invariant_subspace(const Mat& M,
                                     const std::function<bool(std::complex<double>)>& select);

std::vector<std::complex<double>> eigenvalues(const Mat& M);

}  // namespace fcm
