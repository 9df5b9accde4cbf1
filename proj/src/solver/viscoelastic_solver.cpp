#include "dual.hpp"
#include "fem.hpp"
#include "linear_solver.hpp"

#include "nozzle/errors.hpp"
#include "nozzle/solver.hpp"

#include <algorithm>
#include <cmath>

namespace nozzle {

using detail::Constraints;
using detail::Element;
using detail::kMm;

std::vector<ContinuationStage> default_continuation(const GiesekusParams& target, const SolverConfig& cfg) {
    std::vector<ContinuationStage> out;
    const int n = std::max(1, cfg.continuation_steps);
    if (target.lambda == 0.0) return {{0.0, target.alpha_G}};
    const double a0 = std::max(cfg.alpha_G_start, target.alpha_G);
    for (int k = 0; k < n; ++k) {
        const double f = n == 1 ? 1.0 : static_cast<double>(k) / (n - 1);
        out.push_back({target.lambda / 16.0 * std::pow(16.0, f), a0 * std::pow(target.alpha_G / a0, f)});
    }
    return out;
}

namespace {

constexpr int kDofs = 6;
constexpr int kLocal = 18;
using D = detail::Dual<kLocal>;

struct StageParams {
    double eta_s, eta_p, lambda, alpha, rho;
};

struct StabConstants {
    double c1, c2, c3;
};

template <class S>
struct Stabilization {
    S tau1, tau2, tau3, tau_s;
};

// Element stabilization parameters from the element-mean velocity and the
// velocity gradient, differentiated along with the fields.
template <class S>
Stabilization<S> stabilization(const Element& el, const S* X, const StageParams& m, const StabConstants& k) {
    using std::sqrt;
    using detail::inv;
    S u(0.0), v(0.0), L2(1e-18);
    for (int c = 0; c < 2; ++c) {
        S gx(0.0), gy(0.0);
        for (std::size_t a = 0; a < 3; ++a) {
            gx += el.b[a] * X[kDofs * a + static_cast<std::size_t>(c)];
            gy += el.c[a] * X[kDofs * a + static_cast<std::size_t>(c)];
        }
        L2 += gx * gx + gy * gy;
    }
    for (std::size_t a = 0; a < 3; ++a) {
        u += (1.0 / 3.0) * X[kDofs * a];
        v += (1.0 / 3.0) * X[kDofs * a + 1];
    }
    // Regularized so the derivative stays finite at rest.
    const S speed = sqrt(u * u + v * v + 1e-18);
    const double h = el.h;
    const double eta0 = m.eta_s + m.eta_p;
    Stabilization<S> f;
    f.tau1 = inv(k.c1 * eta0 / (h * h) + (k.c2 * m.rho / h) * speed);
    f.tau2 = eta0 + (k.c2 * m.rho * h / k.c1) * speed;
    f.tau_s = 2.0 * m.eta_p * inv(1.0 + m.lambda * ((k.c2 / h) * speed + 2.0 * sqrt(L2)));
    f.tau3 = k.c3 * f.tau_s;
    return f;
}

// Symmetric 2x2 tensor {xx, xy, yy}.
template <class S>
struct Sym {
    S xx, xy, yy;
};

// cosh(s) and sinh(s)/s as functions of q = s^2; smooth through q = 0.
template <class S>
void cosh_sinhc(const S& q, S& ch, S& shc) {
    using std::exp;
    using std::sqrt;
    using detail::inv;
    if (detail::value_of(q) < 1e-2) {
        ch = 1.0 + q * (1.0 / 2 + q * (1.0 / 24 + q * (1.0 / 720 + q * (1.0 / 40320 + q * (1.0 / 3628800)))));
        shc = 1.0 + q * (1.0 / 6 + q * (1.0 / 120 + q * (1.0 / 5040 + q * (1.0 / 362880 + q * (1.0 / 39916800)))));
    } else {
        const S sq = sqrt(q);
        const S e = exp(sq);
        const S ei = inv(e);
        ch = 0.5 * (e + ei);
        shc = 0.5 * (e - ei) * inv(sq);
    }
}

// Closed-form exp(+-psi) of a symmetric 2x2 tensor.
template <class S>
struct LogConformation {
    S q, ch, shc;       // q = ((xx - yy)/2)^2 + xy^2
    S em;               // exp of the mean eigenvalue
    Sym<S> dev;         // deviatoric part of psi

    explicit LogConformation(const Sym<S>& p) {
        using std::exp;
        dev = {0.5 * (p.xx - p.yy), p.xy, 0.5 * (p.yy - p.xx)};
        q = dev.xx * dev.xx + dev.xy * dev.xy;
        em = exp(0.5 * (p.xx + p.yy));
        cosh_sinhc(q, ch, shc);
    }
    Sym<S> conformation() const {
        return {em * (ch + shc * dev.xx), em * shc * dev.xy, em * (ch + shc * dev.yy)};
    }
    Sym<S> inverse() const {
        using detail::inv;
        const S emi = inv(em);
        return {emi * (ch - shc * dev.xx), -1.0 * emi * shc * dev.xy, emi * (ch - shc * dev.yy)};
    }
    // (s coth s - 1) / q, the weight of the eigen-rotation coupling.
    S rotation_weight() const {
        using detail::inv;
        if (detail::value_of(q) < 1e-2) {
            return 1.0 / 3 + q * (-1.0 / 45 + q * (2.0 / 945 + q * (-1.0 / 4725 + q * (2.0 / 93555))));
        }
        return (ch * inv(shc) - 1.0) * inv(q);
    }
};

template <class S>
Sym<S> polymer_stress(const Sym<S>& psi, const StageParams& m) {
    const Sym<S> c = LogConformation<S>(psi).conformation();
    const double s = m.eta_p / m.lambda;
    return {s * (c.xx - 1.0), s * c.xy, s * (c.yy - 1.0)};
}

template <class S>
void element_residual(const Element& el, const S* X, const StabConstants& sc, const StageParams& m, S* R) {
    const auto& rule = detail::triangle_rule();
    const Stabilization<S> f = stabilization(el, X, m, sc);
    for (int i = 0; i < kLocal; ++i) R[i] = S(0.0);
    // Constant gradients of the linear fields.
    S g[kDofs][2];
    for (int c = 0; c < kDofs; ++c) {
        g[c][0] = S(0.0);
        g[c][1] = S(0.0);
        for (std::size_t a = 0; a < 3; ++a) {
            g[c][0] += el.b[a] * X[kDofs * a + static_cast<std::size_t>(c)];
            g[c][1] += el.c[a] * X[kDofs * a + static_cast<std::size_t>(c)];
        }
    }
    // Polymer stress at the vertices, interpolated linearly inside the element.
    Sym<S> sn[3];
    for (std::size_t a = 0; a < 3; ++a) {
        sn[a] = polymer_stress(Sym<S>{X[kDofs * a + 3], X[kDofs * a + 4], X[kDofs * a + 5]}, m);
    }
    S gs[3][2];
    for (int c = 0; c < 3; ++c) {
        gs[c][0] = S(0.0);
        gs[c][1] = S(0.0);
    }
    for (std::size_t a = 0; a < 3; ++a) {
        const S* comp[3] = {&sn[a].xx, &sn[a].xy, &sn[a].yy};
        for (int c = 0; c < 3; ++c) {
            gs[c][0] += el.b[a] * *comp[c];
            gs[c][1] += el.c[a] * *comp[c];
        }
    }
    const S& ux = g[0][0];
    const S& uy = g[0][1];
    const S& vx = g[1][0];
    const S& vy = g[1][1];
    const S exx = ux, eyy = vy, exy = 0.5 * (uy + vx);
    const S div = ux + vy;
    const S w = 0.5 * (uy - vx);
    const Sym<S> ed{0.5 * (ux - vy), exy, 0.5 * (vy - ux)};
    const double inv_lambda = 1.0 / m.lambda;

    for (std::size_t q = 0; q < 3; ++q) {
        const auto& N = rule[q].N;
        S val[kDofs];
        for (int c = 0; c < kDofs; ++c) {
            val[c] = S(0.0);
            for (std::size_t a = 0; a < 3; ++a) val[c] += N[a] * X[kDofs * a + static_cast<std::size_t>(c)];
        }
        S sp[3] = {S(0.0), S(0.0), S(0.0)};
        for (std::size_t a = 0; a < 3; ++a) {
            sp[0] += N[a] * sn[a].xx;
            sp[1] += N[a] * sn[a].xy;
            sp[2] += N[a] * sn[a].yy;
        }
        const S& u = val[0];
        const S& v = val[1];
        const S& p = val[2];
        const Sym<S> psi{val[3], val[4], val[5]};
        const double W = el.area * rule[q].w;

        const S convx = m.rho * (u * ux + v * uy);
        const S convy = m.rho * (u * vx + v * vy);
        const S rmx = convx + g[2][0] - (gs[0][0] + gs[1][1]);
        const S rmy = convy + g[2][1] - (gs[1][0] + gs[2][1]);

        // Constitutive residual for the log-conformation psi, scaled so that
        // it tends to sigma_p / (2 eta_p) - eps(u) for small psi:
        //   u.grad(psi) - 2 eps - rotation terms - g(c) / lambda,
        // with g(c) = -(1 - 2 alpha) I - alpha c + (1 - alpha) c^-1.
        const LogConformation<S> lc(psi);
        const Sym<S> c = lc.conformation();
        const Sym<S> ci = lc.inverse();
        const S hw = lc.rotation_weight();
        const S proj = hw * (2.0 * (ed.xx * lc.dev.xx + ed.xy * lc.dev.xy));
        const S fq = 2.0 * lc.q * hw;
        const Sym<S> rot{2.0 * exx + fq * ed.xx - proj * lc.dev.xx + 2.0 * w * psi.xy,
                         2.0 * exy + fq * ed.xy - proj * lc.dev.xy + w * (psi.yy - psi.xx),
                         2.0 * eyy + fq * ed.yy - proj * lc.dev.yy - 2.0 * w * psi.xy};
        const double a1 = 1.0 - 2.0 * m.alpha, a2 = m.alpha, a3 = 1.0 - m.alpha;
        const Sym<S> relax{-a1 - a2 * c.xx + a3 * ci.xx, -a2 * c.xy + a3 * ci.xy, -a1 - a2 * c.yy + a3 * ci.yy};
        const S rc_xx = 0.5 * (u * g[3][0] + v * g[3][1] - rot.xx - inv_lambda * relax.xx);
        const S rc_xy = 0.5 * (u * g[4][0] + v * g[4][1] - rot.xy - inv_lambda * relax.xy);
        const S rc_yy = 0.5 * (u * g[5][0] + v * g[5][1] - rot.yy - inv_lambda * relax.yy);

        const S txx = 2.0 * m.eta_s * exx + sp[0] - p + f.tau2 * div - f.tau3 * rc_xx;
        const S txy = 2.0 * m.eta_s * exy + sp[1] - f.tau3 * rc_xy;
        const S tyy = 2.0 * m.eta_s * eyy + sp[2] - p + f.tau2 * div - f.tau3 * rc_yy;

        for (std::size_t a = 0; a < 3; ++a) {
            const double ba = el.b[a], ca = el.c[a], Na = N[a];
            const S w_supg = Na + (f.tau_s * (m.lambda / (2.0 * m.eta_p))) * (u * ba + v * ca);
            R[kDofs * a + 0] += W * (ba * txx + ca * txy + Na * convx);
            R[kDofs * a + 1] += W * (ba * txy + ca * tyy + Na * convy);
            R[kDofs * a + 2] += W * (Na * div + f.tau1 * (ba * rmx + ca * rmy));
            R[kDofs * a + 3] += W * (w_supg * rc_xx - f.tau1 * ba * rmx);
            R[kDofs * a + 4] += W * (2.0 * w_supg * rc_xy - f.tau1 * (ca * rmx + ba * rmy));
            R[kDofs * a + 5] += W * (w_supg * rc_yy - f.tau1 * ca * rmy);
        }
    }
}

class ViscoelasticProblem {
public:
    ViscoelasticProblem(const Mesh& mesh, const BoundaryConditions& bc, const SolverConfig& cfg)
        : mesh_(mesh), stab_{cfg.c1, cfg.c2, cfg.c3}, cons_(kDofs * mesh.nodes.size()) {
        elements_.reserve(mesh.elements.size());
        for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
            elements_.push_back(detail::make_element(mesh, e));
            if (!(elements_.back().area > 0.0)) throw MeshFailure("element with non-positive area");
        }
        detail::apply_velocity_bc(mesh, bc, GeometryMode::Planar, {kDofs, 0, 1}, cons_);
        const auto tags = detail::node_tags(mesh);
        for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
            const auto& t = tags[i];
            if (std::find(t.begin(), t.end(), BoundaryTag::Inlet) != t.end()) {
                for (int c = 3; c < 6; ++c) cons_.set(kDofs * i + static_cast<std::size_t>(c), 0.0);
            }
        }
    }

    std::size_t n_dofs() const { return cons_.fixed.size(); }
    const Constraints& constraints() const { return cons_; }

    // Residual and, when J is non-null, the Jacobian with constrained rows replaced.
    void assemble(const Eigen::VectorXd& X, const StageParams& m, Eigen::VectorXd& Rg,
                  Eigen::SparseMatrix<double>* J) const {
        Rg = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_dofs()));
        std::vector<Eigen::Triplet<double>> trips;
        if (J) trips.reserve(elements_.size() * kLocal * kLocal + n_dofs());
        for (const auto& el : elements_) {
            int gdof[kLocal];
            for (int i = 0; i < kLocal; ++i) gdof[i] = kDofs * el.n[static_cast<std::size_t>(i / kDofs)] + i % kDofs;
            if (J) {
                D Xd[kLocal], Rd[kLocal];
                for (int i = 0; i < kLocal; ++i) Xd[i] = D::variable(X[gdof[i]], i);
                element_residual(el, Xd, stab_, m, Rd);
                for (int i = 0; i < kLocal; ++i) {
                    Rg[gdof[i]] += Rd[i].v;
                    if (cons_.fixed[static_cast<std::size_t>(gdof[i])]) continue;
                    for (int j = 0; j < kLocal; ++j) {
                        if (Rd[i].d[static_cast<std::size_t>(j)] != 0.0) trips.emplace_back(gdof[i], gdof[j], Rd[i].d[static_cast<std::size_t>(j)]);
                    }
                }
            } else {
                double Xl[kLocal], Rl[kLocal];
                for (int i = 0; i < kLocal; ++i) Xl[i] = X[gdof[i]];
                element_residual(el, Xl, stab_, m, Rl);
                for (int i = 0; i < kLocal; ++i) Rg[gdof[i]] += Rl[i];
            }
        }
        for (std::size_t i = 0; i < n_dofs(); ++i) {
            if (cons_.fixed[i]) {
                Rg[static_cast<Eigen::Index>(i)] = X[static_cast<Eigen::Index>(i)] - cons_.value[i];
                if (J) trips.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
            }
        }
        if (J) {
            J->resize(static_cast<Eigen::Index>(n_dofs()), static_cast<Eigen::Index>(n_dofs()));
            J->setFromTriplets(trips.begin(), trips.end());
            J->makeCompressed();
        }
    }

    struct Norms {
        double mom = 0.0, cont = 0.0, cons = 0.0;
    };
    Norms norms(const Eigen::VectorXd& R) const {
        return {detail::free_norm(R, cons_, kDofs, {0, 1}), detail::free_norm(R, cons_, kDofs, {2}),
                detail::free_norm(R, cons_, kDofs, {3, 4, 5})};
    }

    // Nodal strain rate averaged over incident elements (area weights).
    std::vector<std::array<double, 3>> nodal_strain(const Eigen::VectorXd& X) const {
        std::vector<std::array<double, 3>> acc(mesh_.nodes.size(), {0.0, 0.0, 0.0});
        std::vector<double> wsum(mesh_.nodes.size(), 0.0);
        for (const auto& el : elements_) {
            double g[4] = {0, 0, 0, 0};
            for (std::size_t a = 0; a < 3; ++a) {
                const auto n = static_cast<Eigen::Index>(kDofs * el.n[a]);
                g[0] += el.b[a] * X[n];
                g[1] += el.c[a] * X[n];
                g[2] += el.b[a] * X[n + 1];
                g[3] += el.c[a] * X[n + 1];
            }
            for (int n : el.n) {
                auto& s = acc[static_cast<std::size_t>(n)];
                s[0] += el.area * g[0];
                s[1] += el.area * 0.5 * (g[1] + g[2]);
                s[2] += el.area * g[3];
                wsum[static_cast<std::size_t>(n)] += el.area;
            }
        }
        for (std::size_t i = 0; i < acc.size(); ++i) {
            for (double& x : acc[i]) x /= wsum[i];
        }
        return acc;
    }

private:
    const Mesh& mesh_;
    StabConstants stab_;
    std::vector<Element> elements_;
    Constraints cons_;
};


// Newton iteration for one continuation stage. Returns false on failure,
// leaving X at the last iterate.
bool newton_stage(const ViscoelasticProblem& prob, Eigen::VectorXd& X, const StageParams& m,
                  const ViscoelasticProblem::Norms& ref, const SolverConfig& cfg, detail::LinearSolver& lu,
                  std::vector<double>& history, int& iterations) {
    Eigen::VectorXd R;
    Eigen::SparseMatrix<double> J;
    const auto rel = [&](const ViscoelasticProblem::Norms& n) {
        return std::max({ref.mom > 0 ? n.mom / ref.mom : 0.0, ref.cont > 0 ? n.cont / ref.cont : 0.0,
                         ref.cons > 0 ? n.cons / ref.cons : 0.0});
    };
    prob.assemble(X, m, R, &J);
    double r = rel(prob.norms(R));
    const double r_start = r;
    for (int it = 0; it < cfg.max_newton_iters; ++it) {
        history.push_back(r);
        if (!std::isfinite(r)) return false;
        if (r <= cfg.tol_nl) return true;
        // Stalled: a shorter continuation step is cheaper than grinding on.
        if (it >= 10 && r > 1e-3 * r_start) return false;
        try {
            lu.factorize(J);
        } catch (const NoConvergence&) {
            return false;
        }
        Eigen::VectorXd dX = lu.solve(-R);
        ++iterations;
        // Backtracking on the scaled residual.
        double step = 1.0;
        Eigen::VectorXd Xt, Rt;
        double rt = 0.0;
        bool accepted = false;
        for (int ls = 0; ls < 12; ++ls) {
            Xt = X + step * dX;
            prob.assemble(Xt, m, Rt, nullptr);
            rt = rel(prob.norms(Rt));
            if (std::isfinite(rt) && rt < (1.0 - 1e-4 * step) * r) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) return false;
        X = Xt;
        prob.assemble(X, m, R, &J);
        r = rel(prob.norms(R));
    }
    history.push_back(r);
    return r <= cfg.tol_nl;
}

FlowSolution to_solution(const Mesh& mesh, const Eigen::VectorXd& X, const BoundaryConditions& bc,
                         const StageParams& m) {
    FlowSolution sol;
    sol.model = FlowModel::Viscoelastic;
    sol.geometry = GeometryMode::Planar;
    sol.u_ref = bc.u_in;
    const std::size_t n = mesh.nodes.size();
    sol.u.resize(n);
    sol.v.resize(n);
    sol.p.resize(n);
    sol.sigma.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<Eigen::Index>(kDofs * i);
        sol.u[i] = X[k] / kMm;
        sol.v[i] = X[k + 1] / kMm;
        sol.p[i] = X[k + 2];
        const auto sp = polymer_stress(Sym<double>{X[k + 3], X[k + 4], X[k + 5]}, m);
        sol.sigma[i] = {sp.xx, sp.xy, sp.yy};
    }
    return sol;
}

}  // namespace

FlowSolution solve_viscoelastic(const Mesh& mesh, const BoundaryConditions& bc, const GiesekusParams& mat,
                                const SolverConfig& cfg_in, const FlowSolution* initial) {
    if (const auto v = mat.violations(); !v.empty()) throw ValidationError(v);
    if (const auto v = cfg_in.violations(); !v.empty()) throw ValidationError(v);
    if (const auto v = bc.violations(false); !v.empty()) throw ValidationError(v);
    SolverConfig cfg = cfg_in;
    cfg.geometry = GeometryMode::Planar;

    // Newtonian flow with the total viscosity: the lambda = 0 solution, and
    // the seed of the continuation.
    SolverConfig ncfg = cfg;
    ncfg.law = ViscosityLaw::Newtonian;
    ncfg.newtonian_eta = mat.eta_total;
    ncfg.solve_heat = false;
    CrossWlfParams carrier;
    carrier.rho = mat.rho;
    FlowSolution newtonian = solve_gnf(mesh, bc, carrier, ncfg);

    if (mat.lambda == 0.0) {
        // The constitutive law is algebraic: sigma_p = 2 eta_p eps(u).
        ViscoelasticProblem prob(mesh, bc, cfg);
        Eigen::VectorXd X = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(prob.n_dofs()));
        for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
            X[static_cast<Eigen::Index>(kDofs * i)] = newtonian.u[i] * kMm;
            X[static_cast<Eigen::Index>(kDofs * i + 1)] = newtonian.v[i] * kMm;
        }
        const auto strain = prob.nodal_strain(X);
        FlowSolution sol = newtonian;
        sol.model = FlowModel::Viscoelastic;
        sol.geometry = GeometryMode::Planar;
        sol.sigma.resize(mesh.nodes.size());
        for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
            for (std::size_t c = 0; c < 3; ++c) sol.sigma[i][c] = 2.0 * mat.eta_p() * strain[i][c];
        }
        sol.continuation_trace.push_back({0.0, mat.alpha_G});
        return sol;
    }

    ViscoelasticProblem prob(mesh, bc, cfg);
    const auto& cons = prob.constraints();
    const auto n_dofs = static_cast<Eigen::Index>(prob.n_dofs());
    const auto apply_constraints = [&](Eigen::VectorXd& Y) {
        for (std::size_t d = 0; d < cons.fixed.size(); ++d) {
            if (cons.fixed[d]) Y[static_cast<Eigen::Index>(d)] = cons.value[d];
        }
    };

    // Seed state at lambda = 0: Newtonian velocity and pressure, psi = 0.
    // psi ~ 2 lambda eps(u) for small lambda gives the first guess of each
    // stage reached directly from the seed.
    const auto& seed = initial ? *initial : newtonian;
    Eigen::VectorXd X = Eigen::VectorXd::Zero(n_dofs);
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(kDofs * i);
        X[k] = seed.u[i] * kMm;
        X[k + 1] = seed.v[i] * kMm;
        X[k + 2] = seed.p[i];
    }
    apply_constraints(X);
    Eigen::VectorXd psi_rate = Eigen::VectorXd::Zero(n_dofs);
    {
        const auto strain = prob.nodal_strain(X);
        for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
            for (std::size_t c = 0; c < 3; ++c) {
                psi_rate[static_cast<Eigen::Index>(kDofs * i + 3 + c)] = 2.0 * strain[i][c];
            }
        }
        for (std::size_t d = 0; d < cons.fixed.size(); ++d) {
            if (cons.fixed[d]) psi_rate[static_cast<Eigen::Index>(d)] = 0.0;
        }
    }

    const auto schedule = cfg.continuation.empty() ? default_continuation(mat, cfg) : cfg.continuation;
    const auto params_for = [&](const ContinuationStage& st) {
        return StageParams{mat.eta_s(), mat.eta_p(), st.lambda, st.alpha_G, mat.rho};
    };

    // Reference residual: lifted boundary data with zero interior fields at the target parameters.
    ViscoelasticProblem::Norms ref;
    {
        Eigen::VectorXd X0 = Eigen::VectorXd::Zero(n_dofs);
        apply_constraints(X0);
        Eigen::VectorXd R0;
        prob.assemble(X0, params_for(schedule.back()), R0, nullptr);
        ref = prob.norms(R0);
    }

    // Adaptive walk along the schedule. Path position t in [-1, last]: stage k
    // sits at t = k, and t = -1 is the seed state (lambda = 0).
    const double t_end = static_cast<double>(schedule.size() - 1);
    const auto stage_at = [&](double t) {
        if (t <= 0.0) {
            const double f = t + 1.0;
            return ContinuationStage{f * schedule.front().lambda, schedule.front().alpha_G};
        }
        const auto k = std::min(static_cast<std::size_t>(t), schedule.size() - 2);
        const double f = t - static_cast<double>(k);
        const auto& a = schedule[k];
        const auto& b = schedule[k + 1];
        const auto mix = [f](double x, double y) {
            return x > 0.0 && y > 0.0 ? x * std::pow(y / x, f) : x + f * (y - x);
        };
        return ContinuationStage{mix(a.lambda, b.lambda), mix(a.alpha_G, b.alpha_G)};
    };

    std::vector<ContinuationStage> trace;
    std::vector<double> history;
    int iterations = 0;
    detail::LinearSolver lu;
    double t_good = -1.0, t_prev = -1.0, dt = 1.0;
    const double dt_min = std::ldexp(1.0, -cfg.max_stage_halvings);
    Eigen::VectorXd X_prev;
    ContinuationStage last = {0.0, schedule.front().alpha_G};
    while (t_good < t_end) {
        const double t_try = std::min(t_good + dt, t_end);
        const ContinuationStage target = stage_at(t_try);
        Eigen::VectorXd Xs = X;
        if (X_prev.size() == X.size()) {
            // Secant predictor through the last two converged states.
            Xs += ((t_try - t_good) / (t_good - t_prev)) * (X - X_prev);
        } else {
            Xs += target.lambda * psi_rate;
        }
        const int before = iterations;
        const bool ok = newton_stage(prob, Xs, params_for(target), ref, cfg, lu, history, iterations);
        if (cfg.on_stage) cfg.on_stage(target, iterations - before, ok);
        if (ok) {
            X_prev = std::move(X);
            X = std::move(Xs);
            t_prev = t_good;
            t_good = t_try;
            last = target;
            trace.push_back(target);
            const int used = iterations - before;
            if (used <= 4) dt = std::min(2.0 * dt, 2.0);
            else if (used > 8) dt = std::max(0.7 * dt, dt_min);
            continue;
        }
        dt *= 0.5;
        if (dt < dt_min) {
            const int last_index = t_good < 0.0 ? -1 : static_cast<int>(std::floor(t_good + 1e-9));
            throw NoConvergence("viscoelastic continuation failed at lambda=" + std::to_string(target.lambda) +
                                    " alpha_G=" + std::to_string(target.alpha_G),
                                history, last_index);
        }
    }

    FlowSolution sol = to_solution(mesh, X, bc, params_for(last));
    sol.converged = true;
    sol.iterations = iterations;
    sol.residual_history = std::move(history);
    sol.continuation_trace = std::move(trace);
    return sol;
}

}  // namespace nozzle
