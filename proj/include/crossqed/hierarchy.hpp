// hierarchy.hpp — master-equation hierarchy for Fock-state input pulses.
//
// For a single photon per port the joint system/field state is captured by
// the indexed operators rho[m][n][p][q] (m, n photons remaining on the ket/
// bra side of port a's wave packet, p, q for port b) on the truncated space
// atom(3) x cav_a x cav_b. The physical state is the top component; lower
// components carry the field/system cross correlations that feed the output
// photon fluxes. Two-time output correlations (the biphoton coincidence) are
// obtained by a quantum-regression pass: sandwich the tensor with the output
// field of one port, propagate with the same generator, and read the other
// port's flux functional; implemented with an adjoint (backward) solve so a
// single forward/backward pair covers all measurement times.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <optional>
#include <vector>

#include "crossqed/params.hpp"

namespace crossqed::hierarchy {

using SpMat = Eigen::SparseMatrix<cplx>;
using Matrix = Eigen::MatrixXcd;

// Jump operators L_a = sqrt(2 kappa_a) a, L_b = sqrt(2 kappa_b) b,
// L_1 = sqrt(2 Gamma_1) sigma_-^1, L_2 = sqrt(2 Gamma_2) sigma_-^2 and the
// system Hamiltonian on atom x cav_a x cav_b with Fock cutoff n_max.
// Atom basis ordering: |g1>, |g2>, |e>.
struct LindbladChannels {
    int n_max{2};
    int dim{27};
    SpMat H;
    SpMat L_a, L_b, L_1, L_2;
    SpMat L_a_dag, L_b_dag;
    SpMat La_dag_La, Lb_dag_Lb;
    SpMat sigma_ee;
    SpMat G;  // -iH - (1/2) sum_L L^dag L, the no-jump generator

    static LindbladChannels build(const SystemParams& params, int n_max);

    // D[L] rho = L rho L^dag - (L^dag L rho + rho L^dag L)/2
    static Matrix dissipator(const SpMat& L, const Matrix& rho);

    // |g_l, 0, 0><g_l, 0, 0| embedded in the truncated space.
    Matrix ground_state(AtomLevel level) const;
    // atom_rho (3x3) tensor vacuum cavities.
    Matrix embed_atom(const Eigen::Matrix3cd& atom_rho) const;
};

// Indexed set rho[m][n][p][q], m,n <= photons_a, p,q <= photons_b.
struct HierarchyTensor {
    int photons_a{0};
    int photons_b{0};
    int dim{0};
    std::vector<Matrix> comps;

    static HierarchyTensor initial(const Matrix& rho_sys, int photons_a, int photons_b);

    int count() const { return (photons_a + 1) * (photons_a + 1) * (photons_b + 1) * (photons_b + 1); }
    int index(int m, int n, int p, int q) const;
    Matrix& at(int m, int n, int p, int q) { return comps[index(m, n, p, q)]; }
    const Matrix& at(int m, int n, int p, int q) const { return comps[index(m, n, p, q)]; }

    double trace_top() const;
    // max_k || rho[m][n][p][q] - rho[n][m][q][p]^dag ||_max
    double hermiticity_deviation() const;
};

struct Options {
    int n_max = 2;
    double rtol = 1e-8;
    double atol = 1e-10;
    // Invariant guard (trace / hermiticity of sampled states); a violation
    // beyond 10x aborts with a diagnostic.
    double invariant_tol = 1e-8;
    // Simpson nodes for the outer time integral of the coincidence.
    int coincidence_nodes = 512;
    // Condition on "no spontaneous-emission jump": drop the sandwich terms of
    // the atomic channels, keeping their anticommutators. The trace of the
    // physical component then decays to the probability that no photon was
    // lost (the trace-preservation guard is disabled).
    bool atom_no_jump = false;
};

struct Result {
    std::vector<double> times;
    std::vector<double> flux_a;    // <a_out^dag a_out>(t)
    std::vector<double> flux_b;
    std::vector<double> sigma_ee;  // excited-state population of the physical component
    std::vector<double> trace_dev;
    std::vector<double> herm_dev;
    HierarchyTensor final_state;

    double photons_out_a() const;  // integral of flux_a
    double photons_out_b() const;
    // 2 Gamma integral <sigma_ee> dt: photons lost to spontaneous emission.
    double emission_loss(const SystemParams& params) const;
};

Result integrate_hierarchy(const SystemParams& params, const std::optional<Envelope>& pulse_a,
                           const std::optional<Envelope>& pulse_b, const Eigen::Matrix3cd& atom_init,
                           const TimeGrid& grid, const Options& options = {});

// Convenience: sampled flux of one port.
std::vector<double> output_flux(const Result& trajectory, char port);

// P(exactly one photon exits each port) for the |1>_alpha |1>_beta input:
// double integral of <a_out^dag(t) a_out(t) b_out^dag(t') b_out(t')>.
double biphoton_coincidence(const SystemParams& params, const Envelope& pulse_a,
                            const Envelope& pulse_b, const Eigen::Matrix3cd& atom_init,
                            const TimeGrid& grid, const Options& options = {});

}  // namespace crossqed::hierarchy
