#include "crossqed/timebin.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <array>
#include <cmath>
#include <string>

#include "crossqed/errors.hpp"

namespace crossqed::timebin {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Mat7 = Eigen::Matrix<cplx, 7, 7>;
using Vec7 = Eigen::Matrix<cplx, 7, 1>;

// Mode layout in the one-excitation sector: SA, SB (virtual wave-packet
// sources, qubits), CA, CB (cavities), BA, BB (this step's bins), E (atom).
constexpr int SA = 0, SB = 1, CA = 2, CB = 3, BA = 4, BB = 5, ME = 6;

// Two-excitation basis: sorted mode pairs (double occupation only for
// bosonic modes) plus E paired with a mode.
struct Basis2 {
    std::vector<std::pair<int, int>> states;
    int idx[7][7];

    Basis2() {
        for (auto& row : idx)
            for (int& v : row) v = -1;
        for (int i = 0; i < 6; ++i)
            for (int j = i; j < 6; ++j) {
                if (i == j && (i == SA || i == SB)) continue;  // sources hold <= 1
                idx[i][j] = idx[j][i] = static_cast<int>(states.size());
                states.emplace_back(i, j);
            }
        for (int m = 0; m < 6; ++m) {
            idx[m][ME] = idx[ME][m] = static_cast<int>(states.size());
            states.emplace_back(m, ME);
        }
    }
    int size() const { return static_cast<int>(states.size()); }
};

const Basis2& basis2() {
    static const Basis2 b;
    return b;
}

// Coefficient transform of a two-mode unitary: 1-excitation coefficients map
// as c' = V c on the (X, Y) slots.
struct PairUnitary {
    int X, Y;
    Eigen::Matrix2cd V;
};

template <class Vec>
void apply_pair_1(Vec& v, const PairUnitary& u) {
    const cplx x = v[u.X], y = v[u.Y];
    v[u.X] = u.V(0, 0) * x + u.V(0, 1) * y;
    v[u.Y] = u.V(1, 0) * x + u.V(1, 1) * y;
}

void apply_pair_2(VectorXcd& v, const PairUnitary& u) {
    const Basis2& b = basis2();
    const int X = u.X, Y = u.Y;
    const auto& V = u.V;

    // Triple block |2_X>, |1_X 1_Y>, |2_Y> (symmetric square of V).
    const int iXX = b.idx[X][X], iXY = b.idx[X][Y], iYY = b.idx[Y][Y];
    const cplx cXX = iXX >= 0 ? v[iXX] : cplx(0.0);
    const cplx cXY = v[iXY];
    const cplx cYY = iYY >= 0 ? v[iYY] : cplx(0.0);
    const double r2 = std::numbers::sqrt2;
    const cplx nXX = V(0, 0) * V(0, 0) * cXX + r2 * V(0, 0) * V(0, 1) * cXY + V(0, 1) * V(0, 1) * cYY;
    const cplx nXY = r2 * V(0, 0) * V(1, 0) * cXX + (V(0, 0) * V(1, 1) + V(0, 1) * V(1, 0)) * cXY +
                     r2 * V(0, 1) * V(1, 1) * cYY;
    const cplx nYY = V(1, 0) * V(1, 0) * cXX + r2 * V(1, 0) * V(1, 1) * cXY + V(1, 1) * V(1, 1) * cYY;
    if (iXX >= 0) {
        v[iXX] = nXX;
    } else if (std::abs(nXX) > 1e-10) {
        throw NumericalError("timebin: amplitude leaked into a doubly occupied source");
    }
    v[iXY] = nXY;
    if (iYY >= 0) v[iYY] = nYY;

    // Spectator slots: (X,S) <-> (Y,S) rotate with V itself.
    for (int S = 0; S < 7; ++S) {
        if (S == X || S == Y) continue;
        const int iXS = b.idx[X][S], iYS = b.idx[Y][S];
        const cplx x = v[iXS], y = v[iYS];
        v[iXS] = V(0, 0) * x + V(0, 1) * y;
        v[iYS] = V(1, 0) * x + V(1, 1) * y;
    }
}

PairUnitary source_bs(int src, int bin, cplx mu) {
    PairUnitary u{src, bin, Eigen::Matrix2cd::Identity()};
    const double m2 = std::norm(mu);
    const double c = m2 < 1.0 ? std::sqrt(1.0 - m2) : 0.0;
    u.V(0, 0) = c;
    u.V(0, 1) = -std::conj(mu);
    u.V(1, 0) = mu;
    u.V(1, 1) = c;
    return u;
}

PairUnitary cavity_bs(int cav, int bin, double theta) {
    PairUnitary u{cav, bin, Eigen::Matrix2cd::Identity()};
    const double c = std::cos(theta), s = std::sin(theta);
    u.V(0, 0) = c;
    u.V(0, 1) = s;
    u.V(1, 0) = -s;
    u.V(1, 1) = c;
    return u;
}

Mat7 pair_matrix_1(const PairUnitary& u) {
    Mat7 m = Mat7::Identity();
    m(u.X, u.X) = u.V(0, 0);
    m(u.X, u.Y) = u.V(0, 1);
    m(u.Y, u.X) = u.V(1, 0);
    m(u.Y, u.Y) = u.V(1, 1);
    return m;
}

// exp((-i H - Gamma P_E) h) in the one-excitation sector; H couples E to the
// cavities with amplitudes g_a, g_b.
Mat7 half_system_1(cplx g_a, cplx g_b, double gamma, double h) {
    Mat7 gen = Mat7::Zero();
    const cplx mi(0.0, -1.0);
    gen(ME, CA) = mi * g_a;
    gen(ME, CB) = mi * g_b;
    gen(CA, ME) = mi * std::conj(g_a);
    gen(CB, ME) = mi * std::conj(g_b);
    gen(ME, ME) = -gamma;
    return (gen * h).exp();
}

MatrixXcd half_system_2(cplx g_a, cplx g_b, double gamma, double h) {
    const Basis2& b = basis2();
    const int d = b.size();
    MatrixXcd raise = MatrixXcd::Zero(d, d);  // sigma_+ (a g_a + b g_b) part
    for (int s = 0; s < d; ++s) {
        const auto [i, j] = b.states[s];
        if (j == ME) continue;  // already excited
        auto add = [&](int cav, cplx g) {
            if (i == cav && j == cav) {
                raise(b.idx[cav][ME], s) += std::numbers::sqrt2 * g;
            } else if (i == cav) {
                raise(b.idx[j][ME], s) += g;
            } else if (j == cav) {
                raise(b.idx[i][ME], s) += g;
            }
        };
        add(CA, g_a);
        add(CB, g_b);
    }
    MatrixXcd gen = cplx(0.0, -1.0) * (raise + raise.adjoint());
    for (int s = 0; s < d; ++s) {
        if (b.states[s].second == ME) gen(s, s) -= gamma;
    }
    return (gen * h).exp();
}

// Exact bin-by-bin emission amplitudes of the input photon: a beam-splitter
// angle per step that telescopes the remaining wave-packet norm.
std::vector<cplx> source_slices(const Envelope* env, int bins, double dt, bool midpoint) {
    std::vector<cplx> xi(bins, 0.0);
    if (!env) return xi;
    double total = 0.0;
    for (int k = 0; k < bins; ++k) {
        const double t = (k + (midpoint ? 0.5 : 0.0)) * dt;
        xi[k] = (*env)(t)*std::sqrt(dt);
        total += std::norm(xi[k]);
    }
    if (total <= 0.0) throw ConfigError("timebin: input envelope vanishes on the horizon");
    const double scale = 1.0 / std::sqrt(total);
    for (cplx& x : xi) x *= scale;
    return xi;
}

struct LossSector {
    Mat7 rho1 = Mat7::Zero();  // one jump into g1: atom still couples
    Mat7 rho2 = Mat7::Zero();  // one jump into g2: decoupled
};

struct ClassAccumulator {
    double exit_a{0.0}, exit_b{0.0}, lost{0.0};
    double both_a{0.0}, one_each{0.0}, both_b{0.0};
    double one_lost_a{0.0}, one_lost_b{0.0}, both_lost{0.0};
    std::vector<double> env_a, env_b;

    double finalized() const {
        return exit_a + exit_b + lost + both_a + one_each + both_b + one_lost_a + one_lost_b +
               both_lost;
    }
};

}  // namespace

double OutputDistribution::sum() const {
    if (n_photons == 2) return both_a + one_each + both_b + one_lost + both_lost + residual;
    if (n_photons == 1) return exit_a + exit_b + lost + residual;
    return 1.0;
}

Result simulate_timebin(const SystemParams& params, const std::optional<Envelope>& in_a,
                        const std::optional<Envelope>& in_b, AtomLevel atom_init, int bins,
                        double horizon, const Options& options) {
    params.validate();
    if (bins < 8) throw ConfigError("timebin: need at least 8 bins");
    if (horizon <= 0.0) throw ConfigError("timebin: horizon must be positive");
    const double dt = horizon / bins;

    const bool coupled = (atom_init == AtomLevel::g1);
    const cplx g_a = coupled ? params.g_a : cplx(0.0);
    const cplx g_b = coupled ? params.g_b : cplx(0.0);
    const double gamma = params.gamma_total();
    const double rate_scale =
        std::max({2.0 * params.kappa_a * dt, 2.0 * params.kappa_b * dt, std::abs(g_a) * dt,
                  std::abs(g_b) * dt, gamma * dt});
    if (rate_scale > 0.25) {
        throw ConvergenceError("timebin: dt = " + std::to_string(dt) +
                               " too coarse for the given rates; refine the bins");
    }

    const int n_photons = (in_a ? 1 : 0) + (in_b ? 1 : 0);
    const double h_half = options.midpoint ? 0.5 * dt : dt;
    const Mat7 U1 = half_system_1(g_a, g_b, gamma, h_half);
    const Mat7 U1_dec = half_system_1(0.0, 0.0, gamma, h_half);
    const MatrixXcd U2 = half_system_2(g_a, g_b, gamma, h_half);
    const double theta_a = std::sqrt(2.0 * params.kappa_a * dt);
    const double theta_b = std::sqrt(2.0 * params.kappa_b * dt);

    const std::vector<cplx> xi_a = source_slices(in_a ? &*in_a : nullptr, bins, dt, options.midpoint);
    const std::vector<cplx> xi_b = source_slices(in_b ? &*in_b : nullptr, bins, dt, options.midpoint);

    const Basis2& b2 = basis2();
    const int d2 = b2.size();

    // Live state.
    VectorXcd amp2 = VectorXcd::Zero(d2);
    Vec7 amp1 = Vec7::Zero();
    if (n_photons == 2) {
        amp2[b2.idx[SA][SB]] = 1.0;
    } else if (in_a) {
        amp1[SA] = 1.0;
    } else if (in_b) {
        amp1[SB] = 1.0;
    }

    // Co-excitation columns: photon already out in bin j of port a (A1) or
    // port b (B1); rows = one-excitation layout.
    MatrixXcd colsA = MatrixXcd::Zero(7, bins), colsA_next = MatrixXcd::Zero(7, bins);
    MatrixXcd colsB = MatrixXcd::Zero(7, bins), colsB_next = MatrixXcd::Zero(7, bins);
    int nA = 0, nB = 0;

    LossSector loss;
    ClassAccumulator acc;
    acc.env_a.assign(bins, 0.0);
    acc.env_b.assign(bins, 0.0);

    Result res;
    res.dt = dt;
    res.bins = bins;
    res.times.resize(bins);
    if (n_photons == 1) {
        res.amp_a.assign(bins, 0.0);
        res.amp_b.assign(bins, 0.0);
    }

    double r2_a = 1.0, r2_b = 1.0;  // remaining source norms
    double norm_drift = 0.0;

    // Collapse of the two-excitation sector: distribute an exact amount
    // `delta` of lost norm over the post-jump states read from amp2's
    // E-components.
    Mat7 pending1 = Mat7::Zero(), pending2 = Mat7::Zero();
    auto collapse_two = [&](double delta, int k) {
        if (delta <= 1e-300) return;
        Vec7 w = Vec7::Zero();
        double wn = 0.0;
        for (int m = 0; m < 6; ++m) {
            w[m] = amp2[b2.idx[m][ME]];
            wn += std::norm(w[m]);
        }
        if (wn <= 1e-300) {
            acc.both_lost += delta;  // no retrievable partner
            return;
        }
        const double scale = delta / wn;
        const double f1 = gamma > 0.0 ? params.gamma_1 / gamma : 1.0;
        // Bin components finalize instantly (their photon already left).
        const double pa = std::norm(w[BA]) * scale, pb = std::norm(w[BB]) * scale;
        acc.one_lost_a += pa;
        acc.one_lost_b += pb;
        if (k >= 0) {
            acc.env_a[k] += pa;
            acc.env_b[k] += pb;
        }
        Vec7 ws = w;
        ws[BA] = ws[BB] = 0.0;
        pending1 += (f1 * scale) * (ws * ws.adjoint());
        pending2 += ((1.0 - f1) * scale) * (ws * ws.adjoint());
    };

    auto half_amp2 = [&](int k) {
        const double n0 = amp2.squaredNorm();
        amp2 = U2 * amp2;
        collapse_two(n0 - amp2.squaredNorm(), k);
    };
    auto half_amp1 = [&]() {
        const double n0 = amp1.squaredNorm();
        amp1 = U1 * amp1;
        acc.lost += n0 - amp1.squaredNorm();
    };

    for (int k = 0; k < bins; ++k) {
        res.times[k] = (k + 0.5) * dt;

        // Exact source telescoping for this step.
        const cplx mu_a = (r2_a > 1e-24) ? xi_a[k] / std::sqrt(r2_a) : cplx(0.0);
        const cplx mu_b = (r2_b > 1e-24) ? xi_b[k] / std::sqrt(r2_b) : cplx(0.0);
        r2_a = std::max(0.0, r2_a - std::norm(xi_a[k]));
        r2_b = std::max(0.0, r2_b - std::norm(xi_b[k]));
        const PairUnitary bs_sa = source_bs(SA, BA, mu_a);
        const PairUnitary bs_sb = source_bs(SB, BB, mu_b);
        const PairUnitary bs_ca = cavity_bs(CA, BA, theta_a);
        const PairUnitary bs_cb = cavity_bs(CB, BB, theta_b);

        // One-excitation step map (fresh bins enter empty).
        Mat7 step1 = pair_matrix_1(bs_ca) * pair_matrix_1(bs_cb) * pair_matrix_1(bs_sa) *
                     pair_matrix_1(bs_sb);
        Mat7 step1_dec;
        if (options.midpoint) {
            step1_dec = U1_dec * step1 * U1_dec;
            step1 = U1 * step1 * U1;
        } else {
            step1_dec = U1_dec * step1;
            step1 = U1 * step1;
        }

        // --- two-excitation sector ---
        if (n_photons == 2) {
            if (options.midpoint) half_amp2(k);
            apply_pair_2(amp2, bs_sa);
            apply_pair_2(amp2, bs_sb);
            apply_pair_2(amp2, bs_ca);
            apply_pair_2(amp2, bs_cb);
            half_amp2(k);
        }

        // --- co-excitation columns ---
        auto step_columns = [&](MatrixXcd& cols, MatrixXcd& next, int n, bool port_is_a) {
            if (n == 0) return;
            auto act = cols.leftCols(n);
            Eigen::VectorXd before = act.colwise().squaredNorm().real();
            next.leftCols(n).noalias() = step1 * act;
            for (int j = 0; j < n; ++j) {
                const double after = next.col(j).squaredNorm();
                const double lost = std::max(0.0, before[j] - after);
                (port_is_a ? acc.one_lost_a : acc.one_lost_b) += lost;
                const double qa = std::norm(next(BA, j)), qb = std::norm(next(BB, j));
                if (port_is_a) {
                    acc.both_a += qa;
                    acc.one_each += qb;
                } else {
                    acc.one_each += qa;
                    acc.both_b += qb;
                }
                acc.env_a[k] += qa;
                acc.env_b[k] += qb;
                next(BA, j) = next(BB, j) = 0.0;
            }
            cols.swap(next);
        };
        step_columns(colsA, colsA_next, nA, true);
        step_columns(colsB, colsB_next, nB, false);

        // --- harvest this step's departing bins from the 2-exc sector ---
        if (n_photons == 2) {
            const cplx vBABA = amp2[b2.idx[BA][BA]];
            const cplx vBBBB = amp2[b2.idx[BB][BB]];
            const cplx vBABB = amp2[b2.idx[BA][BB]];
            acc.both_a += std::norm(vBABA);
            acc.both_b += std::norm(vBBBB);
            acc.one_each += std::norm(vBABB);
            acc.env_a[k] += 2.0 * std::norm(vBABA) + std::norm(vBABB);
            acc.env_b[k] += 2.0 * std::norm(vBBBB) + std::norm(vBABB);
            amp2[b2.idx[BA][BA]] = amp2[b2.idx[BB][BB]] = amp2[b2.idx[BA][BB]] = 0.0;

            auto harvest = [&](int bin, MatrixXcd& cols, int& n, bool port_is_a) {
                Vec7 col = Vec7::Zero();
                double norm2 = 0.0;
                for (int m = 0; m < 7; ++m) {
                    if (m == BA || m == BB) continue;
                    const int id = b2.idx[m][bin] >= 0 ? b2.idx[m][bin] : -1;
                    if (id < 0) continue;
                    col[m] = -amp2[id];  // outgoing-field sign convention
                    norm2 += std::norm(col[m]);
                    amp2[id] = 0.0;
                }
                if (norm2 > 0.0) {
                    cols.col(n++) = col;
                    (port_is_a ? acc.env_a : acc.env_b)[k] += norm2;
                }
            };
            harvest(BA, colsA, nA, true);
            harvest(BB, colsB, nB, false);
        }

        // --- one-photon (pure) sector ---
        if (n_photons == 1) {
            if (options.midpoint) {
                half_amp1();
                apply_pair_1(amp1, bs_sa);
                apply_pair_1(amp1, bs_sb);
                apply_pair_1(amp1, bs_ca);
                apply_pair_1(amp1, bs_cb);
                half_amp1();
            } else {
                apply_pair_1(amp1, bs_sa);
                apply_pair_1(amp1, bs_sb);
                apply_pair_1(amp1, bs_ca);
                apply_pair_1(amp1, bs_cb);
                half_amp1();
            }
            const cplx out_a = -amp1[BA], out_b = -amp1[BB];
            res.amp_a[k] = out_a / std::sqrt(dt);
            res.amp_b[k] = out_b / std::sqrt(dt);
            acc.exit_a += std::norm(out_a);
            acc.exit_b += std::norm(out_b);
            acc.env_a[k] += std::norm(out_a);
            acc.env_b[k] += std::norm(out_b);
            amp1[BA] = amp1[BB] = 0.0;
        }

        // --- loss sector (one jump already happened) ---
        {
            const double tr_before = (loss.rho1.trace() + loss.rho2.trace()).real();
            loss.rho1 = step1 * loss.rho1 * step1.adjoint();
            loss.rho2 = step1_dec * loss.rho2 * step1_dec.adjoint();
            // Trace lost inside the step is a second spontaneous jump.
            acc.both_lost += std::max(0.0, tr_before - (loss.rho1.trace() + loss.rho2.trace()).real());
            const double emitted_a = (loss.rho1(BA, BA) + loss.rho2(BA, BA)).real();
            const double emitted_b = (loss.rho1(BB, BB) + loss.rho2(BB, BB)).real();
            acc.one_lost_a += emitted_a;
            acc.one_lost_b += emitted_b;
            acc.env_a[k] += emitted_a;
            acc.env_b[k] += emitted_b;
            for (Mat7* r : {&loss.rho1, &loss.rho2}) {
                r->row(BA).setZero();
                r->col(BA).setZero();
                r->row(BB).setZero();
                r->col(BB).setZero();
            }
        }

        // First-jump contributions collected this step enter the loss sector.
        loss.rho1 += pending1;
        loss.rho2 += pending2;
        pending1.setZero();
        pending2.setZero();

        // --- norm + loss balance ---
        double live = (loss.rho1.trace() + loss.rho2.trace()).real();
        if (n_photons == 2) {
            live += amp2.squaredNorm();
            if (nA > 0) live += colsA.leftCols(nA).squaredNorm();
            if (nB > 0) live += colsB.leftCols(nB).squaredNorm();
        } else if (n_photons == 1) {
            live += amp1.squaredNorm();
        }
        norm_drift = std::max(norm_drift, std::abs(live + acc.finalized() - 1.0));
    }

    // Residual probability still inside the system.
    double residual = loss.rho1.trace().real() + loss.rho2.trace().real();
    if (n_photons == 2) {
        residual += amp2.squaredNorm();
        if (nA > 0) residual += colsA.leftCols(nA).squaredNorm();
        if (nB > 0) residual += colsB.leftCols(nB).squaredNorm();
    } else if (n_photons == 1) {
        residual += amp1.squaredNorm();
    }

    OutputDistribution dist;
    dist.n_photons = n_photons;
    dist.exit_a = acc.exit_a;
    dist.exit_b = acc.exit_b;
    dist.lost = acc.lost;
    dist.both_a = acc.both_a;
    dist.one_each = acc.one_each;
    dist.both_b = acc.both_b;
    dist.one_lost_exit_a = acc.one_lost_a;
    dist.one_lost_exit_b = acc.one_lost_b;
    dist.one_lost = acc.one_lost_a + acc.one_lost_b;
    dist.both_lost = acc.both_lost;
    dist.residual = residual;

    res.dist = dist;
    res.norm_drift = norm_drift;
    res.flux_a.resize(bins);
    res.flux_b.resize(bins);
    for (int k = 0; k < bins; ++k) {
        res.flux_a[k] = acc.env_a[k] / dt;
        res.flux_b[k] = acc.env_b[k] / dt;
    }
    return res;
}

ConvergenceReport convergence_report(const std::vector<double>& values_coarse_to_fine) {
    if (values_coarse_to_fine.size() < 3) {
        throw ConfigError("convergence_report: need results at >= 3 resolutions");
    }
    const auto& v = values_coarse_to_fine;
    const std::size_t n = v.size();
    const double e1 = v[n - 2] - v[n - 3];
    const double e2 = v[n - 1] - v[n - 2];

    ConvergenceReport rep;
    rep.values = v;
    for (std::size_t i = 2; i < n; ++i) {
        if ((v[i] - v[i - 1]) * (v[i - 1] - v[i - 2]) < 0.0) rep.monotone = false;
    }
    if (std::abs(e2) < 1e-15) {
        rep.observed_order = 8.0;
        rep.extrapolated = v[n - 1];
        return rep;
    }
    rep.observed_order = std::log2(std::abs(e1 / e2));
    const double denom = std::pow(2.0, rep.observed_order) - 1.0;
    rep.extrapolated = denom > 1e-12 ? v[n - 1] + e2 / denom : v[n - 1];
    return rep;
}

}  // namespace crossqed::timebin
