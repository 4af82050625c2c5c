#include "crossqed/hierarchy.hpp"

#include <cmath>
#include <string>

#include "crossqed/errors.hpp"
#include "crossqed/integrate.hpp"

namespace crossqed::hierarchy {

namespace {

using Triplets = std::vector<Eigen::Triplet<cplx>>;

// kron(atom, cav_a, cav_b) with row index ((atom)*Na + na)*Nb + nb.
SpMat kron3(const Matrix& atom, const Matrix& ca, const Matrix& cb) {
    const int da = static_cast<int>(atom.rows());
    const int dca = static_cast<int>(ca.rows());
    const int dcb = static_cast<int>(cb.rows());
    const int dim = da * dca * dcb;
    Triplets trip;
    for (int i1 = 0; i1 < da; ++i1)
        for (int j1 = 0; j1 < da; ++j1) {
            if (atom(i1, j1) == cplx(0.0)) continue;
            for (int i2 = 0; i2 < dca; ++i2)
                for (int j2 = 0; j2 < dca; ++j2) {
                    if (ca(i2, j2) == cplx(0.0)) continue;
                    const cplx v12 = atom(i1, j1) * ca(i2, j2);
                    for (int i3 = 0; i3 < dcb; ++i3)
                        for (int j3 = 0; j3 < dcb; ++j3) {
                            if (cb(i3, j3) == cplx(0.0)) continue;
                            trip.emplace_back((i1 * dca + i2) * dcb + i3, (j1 * dca + j2) * dcb + j3,
                                              v12 * cb(i3, j3));
                        }
                }
        }
    SpMat m(dim, dim);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

Matrix annihilation(int n_levels) {
    Matrix a = Matrix::Zero(n_levels, n_levels);
    for (int n = 1; n < n_levels; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

// Tr[T * L] for sparse L.
cplx trace_prod(const Matrix& T, const SpMat& L) {
    cplx sum = 0.0;
    for (int k = 0; k < L.outerSize(); ++k) {
        for (SpMat::InnerIterator it(L, k); it; ++it) {
            sum += T(it.col(), it.row()) * it.value();
        }
    }
    return sum;
}

struct Shape {
    int Ma, Mb, dim;
    int count() const { return (Ma + 1) * (Ma + 1) * (Mb + 1) * (Mb + 1); }
    int index(int m, int n, int p, int q) const {
        return ((m * (Ma + 1) + n) * (Mb + 1) + p) * (Mb + 1) + q;
    }
    int matsize() const { return dim * dim; }
};

Eigen::Map<const Matrix> comp(const ode::State& y, const Shape& s, int k) {
    return Eigen::Map<const Matrix>(y.data() + static_cast<std::ptrdiff_t>(k) * s.matsize(), s.dim, s.dim);
}
Eigen::Map<Matrix> comp(ode::State& y, const Shape& s, int k) {
    return Eigen::Map<Matrix>(y.data() + static_cast<std::ptrdiff_t>(k) * s.matsize(), s.dim, s.dim);
}

struct Generator {
    LindbladChannels ops;
    SpMat G_dag, L_1_dag, L_2_dag;
    Shape shape;
    const Envelope* pulse_a{nullptr};
    const Envelope* pulse_b{nullptr};
    bool atom_no_jump{false};

    Generator(const SystemParams& params, int n_max, int Ma, int Mb, const Envelope* pa,
              const Envelope* pb)
        : ops(LindbladChannels::build(params, n_max)), pulse_a(pa), pulse_b(pb) {
        shape = Shape{Ma, Mb, ops.dim};
        G_dag = SpMat(ops.G.adjoint());
        L_1_dag = SpMat(ops.L_1.adjoint());
        L_2_dag = SpMat(ops.L_2.adjoint());
    }

    cplx amp_a(double t) const { return pulse_a ? (*pulse_a)(t) : cplx(0.0); }
    cplx amp_b(double t) const { return pulse_b ? (*pulse_b)(t) : cplx(0.0); }

    // d rho_k = G rho + rho G^dag + sum_z L rho L^dag  + drive couplings
    void forward(double t, const ode::State& y, ode::State& dy) const {
        const cplx a = amp_a(t), b = amp_b(t);
        const cplx ac = std::conj(a), bc = std::conj(b);
        for (int m = 0; m <= shape.Ma; ++m)
            for (int n = 0; n <= shape.Ma; ++n)
                for (int p = 0; p <= shape.Mb; ++p)
                    for (int q = 0; q <= shape.Mb; ++q) {
                        const auto rho = comp(y, shape, shape.index(m, n, p, q));
                        auto out = comp(dy, shape, shape.index(m, n, p, q));
                        out.noalias() = ops.G * rho;
                        out.noalias() += rho * G_dag;
                        out.noalias() += ops.L_a * rho * ops.L_a_dag;
                        out.noalias() += ops.L_b * rho * ops.L_b_dag;
                        if (!atom_no_jump) {
                            if (ops.L_1.nonZeros() > 0) out.noalias() += ops.L_1 * rho * L_1_dag;
                            if (ops.L_2.nonZeros() > 0) out.noalias() += ops.L_2 * rho * L_2_dag;
                        }
                        if (m > 0) {
                            const auto lo = comp(y, shape, shape.index(m - 1, n, p, q));
                            const cplx c = std::sqrt(double(m)) * a;
                            out.noalias() += c * (lo * ops.L_a_dag);
                            out.noalias() -= c * (ops.L_a_dag * lo);
                        }
                        if (n > 0) {
                            const auto lo = comp(y, shape, shape.index(m, n - 1, p, q));
                            const cplx c = std::sqrt(double(n)) * ac;
                            out.noalias() += c * (ops.L_a * lo);
                            out.noalias() -= c * (lo * ops.L_a);
                        }
                        if (p > 0) {
                            const auto lo = comp(y, shape, shape.index(m, n, p - 1, q));
                            const cplx c = std::sqrt(double(p)) * b;
                            out.noalias() += c * (lo * ops.L_b_dag);
                            out.noalias() -= c * (ops.L_b_dag * lo);
                        }
                        if (q > 0) {
                            const auto lo = comp(y, shape, shape.index(m, n, p, q - 1));
                            const cplx c = std::sqrt(double(q)) * bc;
                            out.noalias() += c * (ops.L_b * lo);
                            out.noalias() -= c * (lo * ops.L_b);
                        }
                    }
    }

    // Adjoint generator, for the backward (regression) pass:
    //   (L^+ w)_k = G^dag w + w G + sum_z L^dag w L  + adjoint drive couplings
    void adjoint(double t, const ode::State& w, ode::State& dw) const {
        const cplx a = amp_a(t), b = amp_b(t);
        const cplx ac = std::conj(a), bc = std::conj(b);
        for (int m = 0; m <= shape.Ma; ++m)
            for (int n = 0; n <= shape.Ma; ++n)
                for (int p = 0; p <= shape.Mb; ++p)
                    for (int q = 0; q <= shape.Mb; ++q) {
                        const auto wk = comp(w, shape, shape.index(m, n, p, q));
                        auto out = comp(dw, shape, shape.index(m, n, p, q));
                        out.noalias() = G_dag * wk;
                        out.noalias() += wk * ops.G;
                        out.noalias() += ops.L_a_dag * wk * ops.L_a;
                        out.noalias() += ops.L_b_dag * wk * ops.L_b;
                        if (ops.L_1.nonZeros() > 0) out.noalias() += L_1_dag * wk * ops.L_1;
                        if (ops.L_2.nonZeros() > 0) out.noalias() += L_2_dag * wk * ops.L_2;
                        if (m + 1 <= shape.Ma) {
                            const auto hi = comp(w, shape, shape.index(m + 1, n, p, q));
                            const cplx c = std::sqrt(double(m + 1)) * ac;
                            out.noalias() += c * (hi * ops.L_a);
                            out.noalias() -= c * (ops.L_a * hi);
                        }
                        if (n + 1 <= shape.Ma) {
                            const auto hi = comp(w, shape, shape.index(m, n + 1, p, q));
                            const cplx c = std::sqrt(double(n + 1)) * a;
                            out.noalias() += c * (ops.L_a_dag * hi);
                            out.noalias() -= c * (hi * ops.L_a_dag);
                        }
                        if (p + 1 <= shape.Mb) {
                            const auto hi = comp(w, shape, shape.index(m, n, p + 1, q));
                            const cplx c = std::sqrt(double(p + 1)) * bc;
                            out.noalias() += c * (hi * ops.L_b);
                            out.noalias() -= c * (ops.L_b * hi);
                        }
                        if (q + 1 <= shape.Mb) {
                            const auto hi = comp(w, shape, shape.index(m, n, p, q + 1));
                            const cplx c = std::sqrt(double(q + 1)) * b;
                            out.noalias() += c * (ops.L_b_dag * hi);
                            out.noalias() -= c * (hi * ops.L_b_dag);
                        }
                    }
    }

    // Mean output flux of one port, read off the tensor at time t.
    double flux(const ode::State& y, double t, bool port_a) const {
        const int Mtop_a = shape.Ma, Mtop_b = shape.Mb;
        const auto top = comp(y, shape, shape.index(Mtop_a, Mtop_a, Mtop_b, Mtop_b));
        cplx f = trace_prod(top, port_a ? ops.La_dag_La : ops.Lb_dag_Lb);
        const cplx amp = port_a ? amp_a(t) : amp_b(t);
        const int M = port_a ? Mtop_a : Mtop_b;
        if (M > 0) {
            const double rt = std::sqrt(double(M));
            if (port_a) {
                const auto ket = comp(y, shape, shape.index(M - 1, M, Mtop_b, Mtop_b));
                const auto bra = comp(y, shape, shape.index(M, M - 1, Mtop_b, Mtop_b));
                f += rt * std::conj(amp) * trace_prod(bra, ops.L_a);
                f += rt * amp * trace_prod(ket, ops.L_a_dag);
                const auto low = comp(y, shape, shape.index(M - 1, M - 1, Mtop_b, Mtop_b));
                f += double(M) * std::norm(amp) * low.trace();
            } else {
                const auto ket = comp(y, shape, shape.index(Mtop_a, Mtop_a, M - 1, M));
                const auto bra = comp(y, shape, shape.index(Mtop_a, Mtop_a, M, M - 1));
                f += rt * std::conj(amp) * trace_prod(bra, ops.L_b);
                f += rt * amp * trace_prod(ket, ops.L_b_dag);
                const auto low = comp(y, shape, shape.index(Mtop_a, Mtop_a, M - 1, M - 1));
                f += double(M) * std::norm(amp) * low.trace();
            }
        }
        return f.real();
    }

    // Output-field sandwich of one port applied to the whole tensor:
    //   J_a rho|_{m,n,p,q} = L_a rho_{m,n,p,q} L_a^dag
    //     + sqrt(m) alpha rho_{m-1,n,p,q} L_a^dag
    //     + sqrt(n) alpha^* L_a rho_{m,n-1,p,q}
    //     + sqrt(m n) |alpha|^2 rho_{m-1,n-1,p,q}
    // (and the p,q analog for port b). Its top-component trace is the flux.
    void output_sandwich(const ode::State& y, double t, bool port_a, ode::State& out) const {
        const cplx amp = port_a ? amp_a(t) : amp_b(t);
        const SpMat& L = port_a ? ops.L_a : ops.L_b;
        const SpMat& Ld = port_a ? ops.L_a_dag : ops.L_b_dag;
        out.setZero();
        for (int m = 0; m <= shape.Ma; ++m)
            for (int n = 0; n <= shape.Ma; ++n)
                for (int p = 0; p <= shape.Mb; ++p)
                    for (int q = 0; q <= shape.Mb; ++q) {
                        const auto rho = comp(y, shape, shape.index(m, n, p, q));
                        auto o = comp(out, shape, shape.index(m, n, p, q));
                        o.noalias() = L * rho * Ld;
                        const int k1 = port_a ? m : p;  // ket-side photon index
                        const int k2 = port_a ? n : q;  // bra-side photon index
                        if (k1 > 0) {
                            const int idx = port_a ? shape.index(m - 1, n, p, q)
                                                   : shape.index(m, n, p - 1, q);
                            o.noalias() += (std::sqrt(double(k1)) * amp) * (comp(y, shape, idx) * Ld);
                        }
                        if (k2 > 0) {
                            const int idx = port_a ? shape.index(m, n - 1, p, q)
                                                   : shape.index(m, n, p, q - 1);
                            o.noalias() += (std::sqrt(double(k2)) * std::conj(amp)) * (L * comp(y, shape, idx));
                        }
                        if (k1 > 0 && k2 > 0) {
                            const int idx = port_a ? shape.index(m - 1, n - 1, p, q)
                                                   : shape.index(m, n, p - 1, q - 1);
                            o += (std::sqrt(double(k1 * k2)) * std::norm(amp)) * comp(y, shape, idx);
                        }
                    }
    }

    // Adjoint vector of the flux functional: flux_port(T, t) = <phi(t), T>.
    void flux_functional(double t, bool port_a, ode::State& phi) const {
        phi.setZero();
        const cplx amp = port_a ? amp_a(t) : amp_b(t);
        const int Ma = shape.Ma, Mb = shape.Mb;
        {
            auto top = comp(phi, shape, shape.index(Ma, Ma, Mb, Mb));
            top = Matrix(port_a ? ops.La_dag_La : ops.Lb_dag_Lb);
        }
        const int M = port_a ? Ma : Mb;
        if (M > 0) {
            const double rt = std::sqrt(double(M));
            const int i_bra = port_a ? shape.index(M, M - 1, Mb, Mb) : shape.index(Ma, Ma, M, M - 1);
            const int i_ket = port_a ? shape.index(M - 1, M, Mb, Mb) : shape.index(Ma, Ma, M - 1, M);
            const int i_low = port_a ? shape.index(M - 1, M - 1, Mb, Mb)
                                     : shape.index(Ma, Ma, M - 1, M - 1);
            // conj(amp) Tr[T_bra L] = <amp L^dag, T_bra>, amp Tr[T_ket L^dag] = <conj(amp) L, T_ket>
            comp(phi, shape, i_bra) = rt * amp * Matrix(port_a ? ops.L_a_dag : ops.L_b_dag);
            comp(phi, shape, i_ket) = rt * std::conj(amp) * Matrix(port_a ? ops.L_a : ops.L_b);
            comp(phi, shape, i_low) = double(M) * std::norm(amp) * Matrix::Identity(shape.dim, shape.dim);
        }
    }
};

cplx inner(const ode::State& w, const ode::State& s) {
    return w.conjugate().cwiseProduct(s).sum();  // sum_k Tr[w_k^dag s_k]
}

void validate_atom_rho(const Eigen::Matrix3cd& rho) {
    if (std::abs(rho.trace() - cplx(1.0)) > 1e-9) {
        throw ConfigError("hierarchy: atomic density matrix must have unit trace");
    }
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-9) {
        throw ConfigError("hierarchy: atomic density matrix must be hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(rho);
    if (es.eigenvalues().minCoeff() < -1e-9) {
        throw ConfigError("hierarchy: atomic density matrix must be positive semidefinite");
    }
}

}  // namespace

LindbladChannels LindbladChannels::build(const SystemParams& params, int n_max) {
    params.validate();
    if (n_max < 1) throw ConfigError("hierarchy: n_max must be >= 1");
    LindbladChannels ch;
    ch.n_max = n_max;
    const int nf = n_max + 1;
    ch.dim = 3 * nf * nf;

    Matrix id_atom = Matrix::Identity(3, 3), id_f = Matrix::Identity(nf, nf);
    Matrix af = annihilation(nf);
    Matrix sm1 = Matrix::Zero(3, 3), sm2 = Matrix::Zero(3, 3), see = Matrix::Zero(3, 3);
    sm1(0, 2) = 1.0;  // |g1><e|
    sm2(1, 2) = 1.0;  // |g2><e|
    see(2, 2) = 1.0;

    const SpMat a_full = kron3(id_atom, af, id_f);
    const SpMat b_full = kron3(id_atom, id_f, af);
    const SpMat sm1_full = kron3(sm1, id_f, id_f);
    const SpMat sm2_full = kron3(sm2, id_f, id_f);
    ch.sigma_ee = kron3(see, id_f, id_f);

    const SpMat sp1 = SpMat(sm1_full.adjoint());
    SpMat H = SpMat((params.g_a * a_full + params.g_b * b_full) * sp1);
    H = SpMat(H + SpMat(H.adjoint()));
    ch.H = H;

    ch.L_a = std::sqrt(2.0 * params.kappa_a) * a_full;
    ch.L_b = std::sqrt(2.0 * params.kappa_b) * b_full;
    ch.L_1 = std::sqrt(2.0 * params.gamma_1) * sm1_full;
    ch.L_2 = std::sqrt(2.0 * params.gamma_2) * sm2_full;
    ch.L_a_dag = SpMat(ch.L_a.adjoint());
    ch.L_b_dag = SpMat(ch.L_b.adjoint());
    ch.La_dag_La = SpMat(ch.L_a_dag * ch.L_a);
    ch.Lb_dag_Lb = SpMat(ch.L_b_dag * ch.L_b);

    SpMat K = SpMat(0.5 * (ch.La_dag_La + ch.Lb_dag_Lb));
    if (params.gamma_1 > 0.0) K += SpMat(0.5 * SpMat(ch.L_1.adjoint()) * ch.L_1);
    if (params.gamma_2 > 0.0) K += SpMat(0.5 * SpMat(ch.L_2.adjoint()) * ch.L_2);
    ch.G = SpMat(cplx(0.0, -1.0) * ch.H - K);
    return ch;
}

Matrix LindbladChannels::dissipator(const SpMat& L, const Matrix& rho) {
    const SpMat Ld = SpMat(L.adjoint());
    const SpMat LdL = SpMat(Ld * L);
    return L * rho * Ld - 0.5 * (LdL * rho + rho * LdL);
}

Matrix LindbladChannels::ground_state(AtomLevel level) const {
    Eigen::Matrix3cd atom = Eigen::Matrix3cd::Zero();
    atom(level == AtomLevel::g1 ? 0 : 1, level == AtomLevel::g1 ? 0 : 1) = 1.0;
    return embed_atom(atom);
}

Matrix LindbladChannels::embed_atom(const Eigen::Matrix3cd& atom_rho) const {
    const int nf = n_max + 1;
    Matrix vac = Matrix::Zero(nf, nf);
    vac(0, 0) = 1.0;
    Matrix rho = Matrix::Zero(dim, dim);
    Matrix tmp = Matrix(kron3(atom_rho, vac, vac));
    return tmp;
}

HierarchyTensor HierarchyTensor::initial(const Matrix& rho_sys, int photons_a, int photons_b) {
    HierarchyTensor t;
    t.photons_a = photons_a;
    t.photons_b = photons_b;
    t.dim = static_cast<int>(rho_sys.rows());
    t.comps.assign(t.count(), Matrix::Zero(t.dim, t.dim));
    for (int m = 0; m <= photons_a; ++m)
        for (int p = 0; p <= photons_b; ++p) t.at(m, m, p, p) = rho_sys;
    return t;
}

int HierarchyTensor::index(int m, int n, int p, int q) const {
    return ((m * (photons_a + 1) + n) * (photons_b + 1) + p) * (photons_b + 1) + q;
}

double HierarchyTensor::trace_top() const {
    return at(photons_a, photons_a, photons_b, photons_b).trace().real();
}

double HierarchyTensor::hermiticity_deviation() const {
    double dev = 0.0;
    for (int m = 0; m <= photons_a; ++m)
        for (int n = 0; n <= photons_a; ++n)
            for (int p = 0; p <= photons_b; ++p)
                for (int q = 0; q <= photons_b; ++q) {
                    const Matrix diff = at(m, n, p, q) - at(n, m, q, p).adjoint();
                    dev = std::max(dev, diff.cwiseAbs().maxCoeff());
                }
    return dev;
}

double Result::photons_out_a() const {
    const double dt = times.size() > 1 ? times[1] - times[0] : 0.0;
    return ode::simpson(static_cast<int>(times.size()), dt, [&](int i) { return flux_a[i]; });
}

double Result::photons_out_b() const {
    const double dt = times.size() > 1 ? times[1] - times[0] : 0.0;
    return ode::simpson(static_cast<int>(times.size()), dt, [&](int i) { return flux_b[i]; });
}

double Result::emission_loss(const SystemParams& params) const {
    const double dt = times.size() > 1 ? times[1] - times[0] : 0.0;
    const double integral =
        ode::simpson(static_cast<int>(times.size()), dt, [&](int i) { return sigma_ee[i]; });
    return 2.0 * params.gamma_total() * integral;
}

Result integrate_hierarchy(const SystemParams& params, const std::optional<Envelope>& pulse_a,
                           const std::optional<Envelope>& pulse_b, const Eigen::Matrix3cd& atom_init,
                           const TimeGrid& grid, const Options& options) {
    params.validate();
    grid.validate();
    validate_atom_rho(atom_init);

    const int Ma = pulse_a ? 1 : 0;
    const int Mb = pulse_b ? 1 : 0;
    Generator gen(params, options.n_max, Ma, Mb, pulse_a ? &*pulse_a : nullptr,
                  pulse_b ? &*pulse_b : nullptr);
    gen.atom_no_jump = options.atom_no_jump;

    const Matrix rho0 = gen.ops.embed_atom(atom_init);
    HierarchyTensor tensor0 = HierarchyTensor::initial(rho0, Ma, Mb);

    ode::State y0(static_cast<std::ptrdiff_t>(tensor0.count()) * gen.shape.matsize());
    for (int k = 0; k < tensor0.count(); ++k) {
        comp(y0, gen.shape, k) = tensor0.comps[k];
    }

    Result res;
    const int n = grid.n_samples();
    res.times.reserve(n);
    std::vector<double> samples(n);
    for (int i = 0; i < n; ++i) samples[i] = grid.time(i);

    const double guard = 10.0 * options.invariant_tol;
    auto sampler = [&](int, double t, const ode::State& y) {
        res.times.push_back(t);
        res.flux_a.push_back(gen.flux(y, t, true));
        res.flux_b.push_back(gen.flux(y, t, false));
        const auto top = comp(y, gen.shape, gen.shape.index(Ma, Ma, Mb, Mb));
        res.sigma_ee.push_back(trace_prod(top, gen.ops.sigma_ee).real());
        const double tr_dev = std::abs(top.trace().real() - 1.0);
        double h_dev = 0.0;
        for (int m = 0; m <= Ma; ++m)
            for (int nn = 0; nn <= Ma; ++nn)
                for (int p = 0; p <= Mb; ++p)
                    for (int q = 0; q <= Mb; ++q) {
                        const auto x = comp(y, gen.shape, gen.shape.index(m, nn, p, q));
                        const auto xt = comp(y, gen.shape, gen.shape.index(nn, m, q, p));
                        const double d = (x - xt.adjoint()).cwiseAbs().maxCoeff();
                        if (d > h_dev) h_dev = d;
                        if (d > guard) {
                            throw NumericalError("integrate_hierarchy: hermiticity pairing violated at t = " +
                                                 std::to_string(t) + " component (" + std::to_string(m) + "," +
                                                 std::to_string(nn) + ";" + std::to_string(p) + "," +
                                                 std::to_string(q) + ")");
                        }
                    }
        if (tr_dev > guard && !gen.atom_no_jump) {
            throw NumericalError("integrate_hierarchy: trace of the physical component drifted by " +
                                 std::to_string(tr_dev) + " at t = " + std::to_string(t));
        }
        res.trace_dev.push_back(tr_dev);
        res.herm_dev.push_back(h_dev);
    };

    ode::IntegratorOptions iopt;
    iopt.rtol = options.rtol;
    iopt.atol = options.atol;
    ode::State yT = ode::integrate_dopri5(
        [&gen](double t, const ode::State& y, ode::State& dy) { gen.forward(t, y, dy); },
        grid.t_start, grid.t_end, std::move(y0), samples, sampler, iopt);

    res.final_state.photons_a = Ma;
    res.final_state.photons_b = Mb;
    res.final_state.dim = gen.shape.dim;
    res.final_state.comps.resize(tensor0.count());
    for (int k = 0; k < tensor0.count(); ++k) res.final_state.comps[k] = comp(yT, gen.shape, k);
    return res;
}

std::vector<double> output_flux(const Result& trajectory, char port) {
    if (port == 'a') return trajectory.flux_a;
    if (port == 'b') return trajectory.flux_b;
    throw ConfigError("output_flux: port must be 'a' or 'b'");
}

double biphoton_coincidence(const SystemParams& params, const Envelope& pulse_a,
                            const Envelope& pulse_b, const Eigen::Matrix3cd& atom_init,
                            const TimeGrid& grid, const Options& options) {
    params.validate();
    grid.validate();
    validate_atom_rho(atom_init);

    Generator gen(params, options.n_max, 1, 1, &pulse_a, &pulse_b);
    const double T0 = grid.t_start, T1 = grid.t_end;

    int n_iv = options.coincidence_nodes;
    if (n_iv % 2 != 0) ++n_iv;
    const int n_nodes = n_iv + 1;
    const double h = (T1 - T0) / n_iv;

    const std::ptrdiff_t len = static_cast<std::ptrdiff_t>(gen.shape.count()) * gen.shape.matsize();
    ode::IntegratorOptions iopt;
    iopt.rtol = options.rtol;
    iopt.atol = options.atol;

    // Backward adjoint pass for the flux functional of `port` (true = a):
    // w(t) solves w' = -(L^+ w + phi_port(t)), w(T1) = 0, integrated in
    // s = T1 - t. Stores w at the Simpson nodes.
    auto backward = [&](bool port_is_a) {
        std::vector<ode::State> w_nodes(n_nodes);
        std::vector<double> s_samples(n_nodes);
        for (int i = 0; i < n_nodes; ++i) s_samples[i] = i * h;  // s = T1 - t
        ode::State phi(len);
        auto rhs = [&](double s, const ode::State& w, ode::State& dw) {
            const double t = T1 - s;
            gen.adjoint(t, w, dw);
            gen.flux_functional(t, port_is_a, phi);
            dw += phi;
        };
        auto sampler = [&](int idx, double, const ode::State& w) {
            w_nodes[n_nodes - 1 - idx] = w;  // node time t = T1 - s
        };
        ode::integrate_dopri5(rhs, 0.0, T1 - T0, ode::State::Zero(len), s_samples, sampler, iopt);
        return w_nodes;
    };

    // Forward pass computing Re <w(t_i), J_port rho(t_i)> at the nodes.
    auto forward_overlap = [&](const std::vector<ode::State>& w_nodes, bool sandwich_port_a) {
        std::vector<double> g(n_nodes, 0.0);
        double max_imag = 0.0;
        std::vector<double> t_samples(n_nodes);
        for (int i = 0; i < n_nodes; ++i) t_samples[i] = T0 + i * h;
        const Matrix rho0 = gen.ops.embed_atom(atom_init);
        HierarchyTensor tensor0 = HierarchyTensor::initial(rho0, 1, 1);
        ode::State y0(len), sand(len);
        for (int k = 0; k < tensor0.count(); ++k) comp(y0, gen.shape, k) = tensor0.comps[k];
        auto sampler = [&](int idx, double t, const ode::State& y) {
            gen.output_sandwich(y, t, sandwich_port_a, sand);
            const cplx v = inner(w_nodes[idx], sand);
            g[idx] = v.real();
            max_imag = std::max(max_imag, std::abs(v.imag()));
        };
        ode::integrate_dopri5(
            [&gen](double t, const ode::State& y, ode::State& dy) { gen.forward(t, y, dy); }, T0, T1,
            std::move(y0), t_samples, sampler, iopt);
        if (max_imag > 1e-6) {
            throw NumericalError("biphoton_coincidence: regression overlap developed an imaginary part of " +
                                 std::to_string(max_imag));
        }
        return g;
    };

    // t' > t region: b-flux measured after the a-output sandwich.
    std::vector<double> g1;
    {
        const auto w_b = backward(false);
        g1 = forward_overlap(w_b, true);
    }
    // t > t' region: a-flux measured after the b-output sandwich.
    std::vector<double> g2;
    {
        const auto w_a = backward(true);
        g2 = forward_overlap(w_a, false);
    }

    double total = 0.0;
    for (int i = 0; i + 2 < n_nodes; i += 2) {
        auto f = [&](int k) { return g1[k] + g2[k]; };
        total += h / 3.0 * (f(i) + 4.0 * f(i + 1) + f(i + 2));
    }
    return total;
}

}  // namespace crossqed::hierarchy
