#include "fem.hpp"
#include "linear_solver.hpp"

#include "nozzle/errors.hpp"
#include "nozzle/kernels/kernels.hpp"
#include "nozzle/solver.hpp"

#include <algorithm>
#include <cmath>

namespace nozzle {

using detail::Constraints;
using detail::Element;
using detail::kMm;

std::vector<std::string> BoundaryConditions::violations(bool thermal) const {
    std::vector<std::string> out;
    if (!(u_in > 0.0)) out.emplace_back("bc.u_in must be positive");
    // Equality is the isothermal check case.
    if (thermal && !(T_wall >= T_in)) out.emplace_back("bc.T_wall must not be below bc.T_in");
    return out;
}

std::vector<std::string> SolverConfig::violations() const {
    std::vector<std::string> out;
    if (!(tol_nl > 0.0)) out.emplace_back("solver.tol_nl must be positive");
    if (!(relaxation > 0.0 && relaxation <= 1.0)) out.emplace_back("solver.relaxation must lie in (0, 1]");
    if (max_iters < 1) out.emplace_back("solver.max_iters must be at least 1");
    if (continuation_steps < 1) out.emplace_back("solver.continuation_steps must be at least 1");
    if (max_newton_iters < 1) out.emplace_back("solver.max_newton_iters must be at least 1");
    if (max_stage_halvings < 0) out.emplace_back("solver.max_stage_halvings must not be negative");
    if (!(alpha_G_start > 0.0 && alpha_G_start <= 0.5)) out.emplace_back("solver.alpha_G_start must lie in (0, 0.5]");
    if (!(c1 > 0.0 && c2 >= 0.0)) out.emplace_back("solver stabilization constants must be positive");
    return out;
}

namespace {

struct GnfState {
    Eigen::VectorXd U;  // 3 per node: u, v [m/s], p [Pa]
    Eigen::VectorXd T;  // [K]
};

class GnfProblem {
public:
    GnfProblem(const Mesh& mesh, const BoundaryConditions& bc, const CrossWlfParams& mat, const SolverConfig& cfg)
        : mesh_(mesh), bc_(bc), mat_(mat), cfg_(cfg), axi_(cfg.geometry == GeometryMode::Axisymmetric),
          flow_cons_(3 * mesh.nodes.size()), heat_cons_(mesh.nodes.size()) {
        elements_.reserve(mesh.elements.size());
        for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
            elements_.push_back(detail::make_element(mesh, e));
            if (!(elements_.back().area > 0.0)) throw MeshFailure("element with non-positive area");
        }
        detail::apply_velocity_bc(mesh, bc, cfg.geometry, {3, 0, 1}, flow_cons_);
        const auto tags = detail::node_tags(mesh);
        for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
            const auto& t = tags[i];
            if (std::find(t.begin(), t.end(), BoundaryTag::HeatedWall) != t.end()) heat_cons_.set(i, bc.T_wall);
            else if (std::find(t.begin(), t.end(), BoundaryTag::Inlet) != t.end()) heat_cons_.set(i, bc.T_in);
        }
        const std::size_t nq = 3 * elements_.size();
        for (auto* v : {&dudx_, &dudy_, &dvdx_, &dvdy_, &hoop_, &gamma_, &Tq_, &eta_}) v->assign(nq, 0.0);
    }

    GnfState initial_state() const {
        GnfState s;
        s.U = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * mesh_.nodes.size()));
        s.T = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(mesh_.nodes.size()), bc_.T_in);
        for (std::size_t d = 0; d < flow_cons_.fixed.size(); ++d) {
            if (flow_cons_.fixed[d]) s.U[static_cast<Eigen::Index>(d)] = flow_cons_.value[d];
        }
        for (std::size_t d = 0; d < heat_cons_.fixed.size(); ++d) {
            if (heat_cons_.fixed[d]) s.T[static_cast<Eigen::Index>(d)] = heat_cons_.value[d];
        }
        return s;
    }

    // Viscosity and shear rate at every quadrature point for the given state.
    void update_viscosity(const GnfState& s) {
        const auto& rule = detail::triangle_rule();
        for (std::size_t e = 0; e < elements_.size(); ++e) {
            const auto& el = elements_[e];
            double gx[4] = {0, 0, 0, 0};
            for (int a = 0; a < 3; ++a) {
                const auto n = static_cast<Eigen::Index>(el.n[static_cast<std::size_t>(a)]);
                const double u = s.U[3 * n], v = s.U[3 * n + 1];
                gx[0] += el.b[static_cast<std::size_t>(a)] * u;
                gx[1] += el.c[static_cast<std::size_t>(a)] * u;
                gx[2] += el.b[static_cast<std::size_t>(a)] * v;
                gx[3] += el.c[static_cast<std::size_t>(a)] * v;
            }
            for (std::size_t q = 0; q < 3; ++q) {
                const std::size_t k = 3 * e + q;
                dudx_[k] = gx[0];
                dudy_[k] = gx[1];
                dvdx_[k] = gx[2];
                dvdy_[k] = gx[3];
                double r = 0.0, v = 0.0, T = 0.0;
                for (int a = 0; a < 3; ++a) {
                    const auto ai = static_cast<std::size_t>(a);
                    const auto n = static_cast<Eigen::Index>(el.n[ai]);
                    r += rule[q].N[ai] * el.y[ai];
                    v += rule[q].N[ai] * s.U[3 * n + 1];
                    T += rule[q].N[ai] * s.T[n];
                }
                hoop_[k] = axi_ ? v / r : 0.0;
                Tq_[k] = std::max(T, cfg_.T_visc_floor);
            }
        }
        const auto& kt = kernels::active_kernels();
        const kernels::GradientBatch g{dudx_.data(), dudy_.data(), dvdx_.data(), dvdy_.data(), hoop_.data()};
        kt.shear_rate(g, gamma_.size(), cfg_.gamma_min, gamma_.data());
        switch (cfg_.law) {
            case ViscosityLaw::CrossWlf:
                if (cfg_.T_visc_floor <= mat_.wlf_pole()) {
                    for (double T : Tq_) {
                        if (T <= mat_.wlf_pole()) throw DomainError("temperature at or below the WLF pole");
                    }
                }
                kt.cross_wlf(gamma_.data(), Tq_.data(), gamma_.size(), mat_, eta_.data());
                break;
            case ViscosityLaw::PowerLaw:
                for (std::size_t k = 0; k < gamma_.size(); ++k) {
                    eta_[k] = cfg_.power_law_K * std::pow(gamma_[k], cfg_.power_law_n - 1.0);
                }
                break;
            case ViscosityLaw::Newtonian:
                std::fill(eta_.begin(), eta_.end(), cfg_.newtonian_eta);
                break;
        }
    }

    void assemble_flow(const GnfState& s, Eigen::SparseMatrix<double>& A, Eigen::VectorXd& b) const {
        const auto& rule = detail::triangle_rule();
        const double rho = cfg_.advection ? mat_.rho : 0.0;
        detail::SystemBuilder sb(3 * mesh_.nodes.size());
        sb.reserve(elements_.size() * 81);
        for (std::size_t e = 0; e < elements_.size(); ++e) {
            const auto& el = elements_[e];
            double K[9][9] = {};
            for (std::size_t q = 0; q < 3; ++q) {
                const auto& N = rule[q].N;
                double r = 0.0, ub = 0.0, vb = 0.0;
                for (std::size_t a = 0; a < 3; ++a) {
                    const auto n = static_cast<Eigen::Index>(el.n[a]);
                    r += N[a] * el.y[a];
                    ub += N[a] * s.U[3 * n];
                    vb += N[a] * s.U[3 * n + 1];
                }
                const double W = el.area * rule[q].w * (axi_ ? r : 1.0);
                const double eta = eta_[3 * e + q];
                const double speed = std::hypot(ub, vb);
                const double tau_m = 1.0 / (cfg_.c1 * eta / (el.h * el.h) + cfg_.c2 * rho * speed / el.h);
                const double tau_c = el.h * el.h / (cfg_.c1 * tau_m);
                const double ir = axi_ ? 1.0 / r : 0.0;
                for (std::size_t a = 0; a < 3; ++a) {
                    const double ba = el.b[a], ca = el.c[a], Na = N[a];
                    const double diva = ca + Na * ir;  // divergence of the transverse test function
                    for (std::size_t bb = 0; bb < 3; ++bb) {
                        const double bB = el.b[bb], cB = el.c[bb], NB = N[bb];
                        const double divb = cB + NB * ir;
                        const double adv = rho * (ub * bB + vb * cB);
                        K[3 * a][3 * bb] += W * (eta * (2.0 * ba * bB + ca * cB) + rho * Na * (ub * bB + vb * cB) + tau_c * ba * bB);
                        K[3 * a][3 * bb + 1] += W * (eta * ca * bB + tau_c * ba * divb);
                        K[3 * a][3 * bb + 2] += W * (-ba * NB);
                        K[3 * a + 1][3 * bb] += W * (eta * ba * cB + tau_c * diva * bB);
                        K[3 * a + 1][3 * bb + 1] += W * (eta * (2.0 * ca * cB + ba * bB) + 2.0 * eta * Na * NB * ir * ir +
                                                          rho * Na * (ub * bB + vb * cB) + tau_c * diva * divb);
                        K[3 * a + 1][3 * bb + 2] += W * (-diva * NB);
                        // Continuity with pressure stabilization; residual keeps the
                        // first-order axisymmetric viscous terms that survive for P1.
                        K[3 * a + 2][3 * bb] += W * (-Na * bB - tau_m * ba * (adv - eta * cB * ir));
                        K[3 * a + 2][3 * bb + 1] += W * (-Na * divb - tau_m * ca * (adv - eta * (cB * ir - NB * ir * ir)));
                        K[3 * a + 2][3 * bb + 2] += W * (-tau_m * (ba * bB + ca * cB));
                    }
                }
            }
            for (int i = 0; i < 9; ++i) {
                const int gi = 3 * el.n[static_cast<std::size_t>(i / 3)] + i % 3;
                for (int j = 0; j < 9; ++j) sb.add(gi, 3 * el.n[static_cast<std::size_t>(j / 3)] + j % 3, K[i][j]);
            }
        }
        sb.finish(flow_cons_, A, b);
    }

    void assemble_heat(const GnfState& s, Eigen::SparseMatrix<double>& A, Eigen::VectorXd& b) const {
        const auto& rule = detail::triangle_rule();
        const double rc = mat_.rho * mat_.cp, kap = mat_.kappa;
        detail::SystemBuilder sb(mesh_.nodes.size());
        sb.reserve(elements_.size() * 9);
        for (std::size_t e = 0; e < elements_.size(); ++e) {
            const auto& el = elements_[e];
            double K[3][3] = {}, F[3] = {};
            for (std::size_t q = 0; q < 3; ++q) {
                const auto& N = rule[q].N;
                double r = 0.0, ub = 0.0, vb = 0.0;
                for (std::size_t a = 0; a < 3; ++a) {
                    const auto n = static_cast<Eigen::Index>(el.n[a]);
                    r += N[a] * el.y[a];
                    ub += N[a] * s.U[3 * n];
                    vb += N[a] * s.U[3 * n + 1];
                }
                const double W = el.area * rule[q].w * (axi_ ? r : 1.0);
                const double ir = axi_ ? 1.0 / r : 0.0;
                const double speed = std::hypot(ub, vb);
                const double tau = 1.0 / std::sqrt(std::pow(2.0 * rc * speed / el.h, 2) + std::pow(12.0 * kap / (el.h * el.h), 2));
                const double g = gamma_[3 * e + q];
                const double Q = cfg_.viscous_heating ? eta_[3 * e + q] * g * g : 0.0;
                for (std::size_t a = 0; a < 3; ++a) {
                    const double adv_a = rc * (ub * el.b[a] + vb * el.c[a]);
                    for (std::size_t bb = 0; bb < 3; ++bb) {
                        const double adv_b = rc * (ub * el.b[bb] + vb * el.c[bb]);
                        K[a][bb] += W * (kap * (el.b[a] * el.b[bb] + el.c[a] * el.c[bb]) + N[a] * adv_b +
                                         tau * adv_a * (adv_b - kap * el.c[bb] * ir));
                    }
                    F[a] += W * Q * (N[a] + tau * adv_a);
                }
            }
            for (std::size_t a = 0; a < 3; ++a) {
                sb.add_rhs(el.n[a], F[a]);
                for (std::size_t bb = 0; bb < 3; ++bb) sb.add(el.n[a], el.n[bb], K[a][bb]);
            }
        }
        sb.finish(heat_cons_, A, b);
    }

    const Constraints& flow_constraints() const { return flow_cons_; }
    const Constraints& heat_constraints() const { return heat_cons_; }

private:
    const Mesh& mesh_;
    const BoundaryConditions& bc_;
    const CrossWlfParams& mat_;
    const SolverConfig& cfg_;
    bool axi_;
    std::vector<Element> elements_;
    Constraints flow_cons_;
    Constraints heat_cons_;
    std::vector<double> dudx_, dudy_, dvdx_, dvdy_, hoop_, gamma_, Tq_, eta_;
};

}  // namespace

FlowSolution solve_gnf(const Mesh& mesh, const BoundaryConditions& bc, const CrossWlfParams& mat,
                       const SolverConfig& cfg) {
    if (const auto v = cfg.violations(); !v.empty()) throw ValidationError(v);
    if (const auto v = bc.violations(cfg.solve_heat); !v.empty()) throw ValidationError(v);
    GnfProblem prob(mesh, bc, mat, cfg);
    GnfState s = prob.initial_state();
    const bool heat = cfg.solve_heat;

    detail::LinearSolver flow_lu, heat_lu;
    Eigen::SparseMatrix<double> A, AT;
    Eigen::VectorXd b, bT;
    double r0_flow = -1.0, r0_heat = -1.0;

    FlowSolution sol;
    sol.model = FlowModel::GeneralizedNewtonian;
    sol.geometry = cfg.geometry;
    sol.u_ref = bc.u_in;

    for (int it = 0; it <= cfg.max_iters; ++it) {
        prob.update_viscosity(s);
        prob.assemble_flow(s, A, b);
        const double rf = detail::free_norm(A * s.U - b, prob.flow_constraints(), 3, {0, 1, 2});
        // Residuals are relative to the first one. The reference never drops
        // below 1e-8 |A| |x|, so a start that is already exact up to round-off
        // (uniform temperature with T_wall = T_in) counts as converged.
        double rh = 0.0, floor_h = 0.0;
        const double floor_f =
            1e-8 * detail::free_norm(A.cwiseAbs() * s.U.cwiseAbs(), prob.flow_constraints(), 3, {0, 1, 2});
        if (heat) {
            prob.assemble_heat(s, AT, bT);
            rh = detail::free_norm(AT * s.T - bT, prob.heat_constraints(), 1, {0});
            floor_h = 1e-8 * detail::free_norm(AT.cwiseAbs() * s.T.cwiseAbs(), prob.heat_constraints(), 1, {0});
        }
        if (r0_flow < 0.0) {
            r0_flow = rf;
            r0_heat = rh;
        }
        const double rel_f = std::max(r0_flow, floor_f) > 0.0 ? rf / std::max(r0_flow, floor_f) : 0.0;
        const double rel_h = std::max(r0_heat, floor_h) > 0.0 ? rh / std::max(r0_heat, floor_h) : 0.0;
        const double rel = std::max(rel_f, rel_h);
        sol.residual_history.push_back(rel);
        if (!std::isfinite(rel)) break;
        if (it > 0 && rel <= cfg.tol_nl) {
            sol.converged = true;
            sol.iterations = it;
            break;
        }
        if (r0_flow == 0.0 && r0_heat == 0.0) {
            sol.converged = true;
            break;
        }
        if (it == cfg.max_iters) break;

        flow_lu.factorize(A);
        const Eigen::VectorXd U_new = flow_lu.solve(b);
        // The first solve starts from the lifted boundary data; relaxing it only slows things down.
        const double w = it == 0 ? 1.0 : cfg.relaxation;
        s.U += w * (U_new - s.U);
        if (heat) {
            prob.update_viscosity(s);
            prob.assemble_heat(s, AT, bT);
            heat_lu.factorize(AT);
            const Eigen::VectorXd T_new = heat_lu.solve(bT);
            s.T += w * (T_new - s.T);
        }
    }
    if (!sol.converged) {
        throw NoConvergence("generalized Newtonian iteration did not converge (relative residual " +
                                std::to_string(sol.residual_history.back()) + ")",
                            sol.residual_history);
    }

    const std::size_t n = mesh.nodes.size();
    sol.u.resize(n);
    sol.v.resize(n);
    sol.p.resize(n);
    sol.T.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        sol.u[i] = s.U[3 * k] / kMm;
        sol.v[i] = s.U[3 * k + 1] / kMm;
        sol.p[i] = s.U[3 * k + 2];
        sol.T[i] = heat ? s.T[k] : bc.T_in;
    }
    return sol;
}

}  // namespace nozzle
