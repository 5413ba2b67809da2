#pragma once

#include <floquetcm/types.hpp>

#include <string>

namespace fcm {

// Exact center-manifold graph of the cylinder system in eigenbasis coordinates.
double cylinder_graph(double z1, double z3);
double cylinder_graph_dz1(double z1);
// Binomial partial sum through z1^{2K}.
double cylinder_graph_series(double z1, int K);
// z2' - H_z1 z1' - H_z3 z3' evaluated with the eigenbasis field.
double cylinder_graph_residual(double z1, double z3);

enum class PhiId { Zero, Sin, Cos };
PhiId phi_from_string(const std::string& s);
std::string to_string(PhiId p);

struct FamilyOptions {
    double rel_tol = 1e-8;
    double x_max = 0.5;  // cap on |x| standing in for the unquantified neighbourhood
};

// One member of the non-unique family of graphs for driven2d.
// x < 0 needs alpha = beta = 0 and phi = zero; x > 0 needs alpha, beta > 0.
double nonunique_family(double t, double x, double alpha, double beta, PhiId phi,
                        const FamilyOptions& opt = {});

// H_t - x^2 H_x + H - sin(t) x^2 by central differences.
double family_residual(double t, double x, double alpha, double beta, PhiId phi,
                       double h = 1e-4, const FamilyOptions& opt = {1e-12, 0.5});

}  // namespace fcm
