#include "box_qp.hpp"
#include "quadratic_model.hpp"

#include "nozzle/errors.hpp"
#include "nozzle/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace nozzle {

const char* to_string(Termination t) {
    switch (t) {
        case Termination::RadiusFloor: return "radius_floor";
        case Termination::Budget: return "budget";
        case Termination::Stagnation: return "stagnation";
    }
    return "unknown";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void validate(const OptProblem& p) {
    std::vector<std::string> v;
    const std::size_t n = p.dim;
    if (n == 0) v.push_back("dim must be positive");
    if (p.lower.size() != n || p.upper.size() != n) v.push_back("bounds must have dim entries");
    for (std::size_t i = 0; i < std::min({n, p.lower.size(), p.upper.size()}); ++i) {
        if (!(p.lower[i] < p.upper[i])) v.push_back("lower bound " + std::to_string(i) + " is not below upper bound");
    }
    if (p.x0.size() != n) v.push_back("x0 must have dim entries");
    if (p.A.size() != p.b.size()) v.push_back("A and b must have the same number of rows");
    for (const auto& row : p.A) {
        if (row.size() != n) v.push_back("constraint rows must have dim entries");
    }
    if (!p.objective) v.push_back("objective is not set");
    if (p.budget < 2 * n + 1) v.push_back("budget must be at least 2 dim + 1");
    if (!(p.penalty_factor >= 1.0)) v.push_back("penalty_factor must be >= 1");
    if (!v.empty()) throw ValidationError(v);
}

// Problem in unit-box coordinates z = (x - lower) / range.
class TrustRegion {
public:
    explicit TrustRegion(const OptProblem& p) : p_(p), n_(static_cast<Eigen::Index>(p.dim)) {
        lo_ = VectorXd::Map(p.lower.data(), n_);
        range_ = VectorXd::Map(p.upper.data(), n_) - lo_;
        const auto m = static_cast<Eigen::Index>(p.A.size());
        C_.resize(m, n_);
        d_.resize(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const VectorXd a = VectorXd::Map(p.A[static_cast<std::size_t>(i)].data(), n_);
            C_.row(i) = a.cwiseProduct(range_).transpose();
            d_[i] = p.b[static_cast<std::size_t>(i)] - a.dot(lo_);
        }
        const double min_range = range_.minCoeff();
        floor_ = p.tol_x > 0.0 ? p.tol_x / min_range : 1e-4;
        delta_ = p.initial_radius > 0.0 ? p.initial_radius / min_range : 0.1;
        delta_ = std::max(delta_, floor_);
        window_ = p.stagnation_window > 0 ? p.stagnation_window : 3 * p.dim;
    }

    OptResult run() {
        const VectorXd z0 = to_z(p_.x0);
        if (!feasible(z0, 0.0)) throw InfeasibleStart("x0 violates a bound or a linear constraint");
        if (!evaluate(z0)) throw InfeasibleStart("objective failed at x0");
        center_ = 0;
        H_ = MatrixXd::Zero(n_, n_);
        initial_set();
        while (!done_) iterate();
        return result_;
    }

private:
    VectorXd to_z(const std::vector<double>& x) const {
        return (VectorXd::Map(x.data(), n_) - lo_).cwiseQuotient(range_);
    }
    std::vector<double> to_x(const VectorXd& z) const {
        const VectorXd x = lo_ + z.cwiseProduct(range_);
        return {x.data(), x.data() + n_};
    }

    bool feasible(const VectorXd& z, double tol) const {
        for (Eigen::Index i = 0; i < n_; ++i) {
            if (z[i] < -tol || z[i] > 1.0 + tol) return false;
        }
        if (C_.rows() == 0) return true;
        return ((C_ * z - d_).array() >= -tol).all();
    }

    // Snap round-off outside the bounds back in; false if still infeasible.
    bool repair(VectorXd& z) const {
        z = z.cwiseMax(0.0).cwiseMin(1.0);
        return feasible(z, 0.0);
    }

    // Evaluates at z; on success appends to the interpolation set.
    bool evaluate(const VectorXd& z) {
        if (result_.n_evals >= p_.budget) {
            finish(Termination::Budget);
            return false;
        }
        Evaluation ev;
        ev.x = to_x(z);
        std::optional<double> f;
        try {
            const double v = p_.objective(ev.x);
            if (std::isfinite(v)) f = v;
        } catch (const std::exception&) {
        }
        ++result_.n_evals;
        const bool first = result_.history.empty();
        if (f) {
            ev.f = *f;
            if (first || *f < result_.f_best) {
                const double gain = first ? 0.0 : result_.f_best - *f;
                if (first || gain > p_.stagnation_tol * std::abs(result_.f_best)) stagnant_ = 0;
                else ++stagnant_;
                result_.f_best = *f;
                result_.x_best = ev.x;
            } else {
                ++stagnant_;
            }
            pts_.push_back(z);
            vals_.push_back(*f);
        } else {
            ev.feasible = false;
            ev.f = first ? 0.0 : p_.penalty_factor * std::abs(result_.f_best);
            ++stagnant_;
        }
        result_.history.push_back(ev);
        if (!p_.checkpoint_path.empty() && p_.checkpoint_every > 0 && result_.n_evals % p_.checkpoint_every == 0) {
            write_checkpoint(p_.checkpoint_path, result_.history);
        }
        if (!first && stagnant_ >= window_) finish(Termination::Stagnation);
        else if (result_.n_evals >= p_.budget) finish(Termination::Budget);
        return f.has_value();
    }

    void finish(Termination t) {
        if (done_) return;
        done_ = true;
        result_.termination = t;
        if (!p_.checkpoint_path.empty()) write_checkpoint(p_.checkpoint_path, result_.history);
    }

    // Longest feasible move from z along dir, capped at len.
    double reach(const VectorXd& z, const VectorXd& dir, double len) const {
        const VectorXd l = -z, u = VectorXd::Ones(n_) - z;
        const VectorXd d = d_ - C_ * z;
        return detail::max_feasible_step(VectorXd::Zero(n_), dir, l, u, C_, d, len);
    }

    // 2n points around the start: +-delta along each axis, or a feasible substitute.
    void initial_set() {
        const VectorXd z0 = pts_[0];
        for (Eigen::Index i = 0; i < n_ && !done_; ++i) {
            std::vector<VectorXd> dirs;
            VectorXd e = VectorXd::Zero(n_);
            e[i] = 1.0;
            dirs.push_back(e);
            dirs.push_back(-e);
            for (Eigen::Index j = 0; j < n_; ++j) {
                if (j == i) continue;
                VectorXd ej = VectorXd::Zero(n_);
                ej[j] = 1.0;
                dirs.push_back((e + ej).normalized());
                dirs.push_back((e - ej).normalized());
                dirs.push_back((-e + ej).normalized());
                dirs.push_back((-e - ej).normalized());
            }
            int placed = 0;
            double pending = 0.0;
            for (const auto& dir : dirs) {
                if (placed == 2 || done_) break;
                double t = reach(z0, dir, delta_);
                if (t < 0.1 * delta_) {
                    pending += delta_;
                    continue;
                }
                // A blocked partner direction is compensated with a longer step here.
                if (pending > 0.0) t = std::max(t, reach(z0, dir, 2.0 * delta_));
                pending = 0.0;
                VectorXd z = z0 + t * dir;
                if (!repair(z) || duplicate(z)) continue;
                evaluate(z);
                ++placed;
            }
        }
        // The start point stays the centre unless a set point is better.
        pick_center();
        stagnant_ = 0;
    }

    bool duplicate(const VectorXd& z) const {
        for (const auto& q : pts_) {
            if ((q - z).lpNorm<Eigen::Infinity>() <= 1e-14) return true;
        }
        return false;
    }

    void pick_center() {
        center_ = 0;
        for (std::size_t k = 1; k < vals_.size(); ++k) {
            if (vals_[k] < vals_[center_]) center_ = k;
        }
    }

    void build_model() {
        model_.build(pts_, vals_, pts_[center_], H_);
        H_ = model_.hessian();
        result_.max_model_mismatch = std::max(result_.max_model_mismatch, model_.mismatch());
    }

    // Replace the point whose removal best preserves poisedness given the newcomer.
    void insert(const VectorXd& z, double f, bool keep_center) {
        const std::size_t cap = 2 * p_.dim + 1;
        if (pts_.size() < cap) {
            pts_.push_back(z);
            vals_.push_back(f);
            return;
        }
        std::size_t worst = pts_.size();
        double score = -1.0;
        for (std::size_t k = 0; k < pts_.size(); ++k) {
            if (keep_center && k == center_) continue;
            const double dist = (pts_[k] - pts_[center_]).lpNorm<Eigen::Infinity>() / delta_;
            const double s = std::abs(model_.lagrange(k, z)) * std::max(1.0, dist * dist);
            if (s > score) {
                score = s;
                worst = k;
            }
        }
        pts_[worst] = z;
        vals_[worst] = f;
    }

    // Re-evaluate near the centre to replace the point farthest from it.
    bool geometry_step() {
        std::size_t far = center_;
        double dist = 0.0;
        for (std::size_t k = 0; k < pts_.size(); ++k) {
            const double d = (pts_[k] - pts_[center_]).lpNorm<Eigen::Infinity>();
            if (d > dist) {
                dist = d;
                far = k;
            }
        }
        if (dist <= 2.0 * delta_ || far == center_) return false;
        const VectorXd zc = pts_[center_];
        VectorXd best;
        double lbest = -1.0;
        for (Eigen::Index i = 0; i < n_; ++i) {
            for (double sgn : {1.0, -1.0}) {
                VectorXd dir = VectorXd::Zero(n_);
                dir[i] = sgn;
                const double t = reach(zc, dir, delta_);
                if (t < 0.1 * delta_) continue;
                VectorXd z = zc + t * dir;
                if (!repair(z) || duplicate(z)) continue;
                const double l = std::abs(model_.lagrange(far, z));
                if (l > lbest) {
                    lbest = l;
                    best = z;
                }
            }
        }
        if (lbest < 0.0) return false;
        pts_.erase(pts_.begin() + static_cast<std::ptrdiff_t>(far));
        vals_.erase(vals_.begin() + static_cast<std::ptrdiff_t>(far));
        if (far < center_) --center_;
        evaluate(best);
        pick_center();
        return true;
    }

    void shrink_or_stop() {
        if (delta_ <= floor_ * (1.0 + 1e-12)) {
            finish(Termination::RadiusFloor);
            return;
        }
        delta_ = std::max(0.5 * delta_, floor_);
    }

    void iterate() {
        build_model();
        const VectorXd zc = pts_[center_];
        const VectorXd l = (-zc).cwiseMax(-delta_);
        const VectorXd u = (VectorXd::Ones(n_) - zc).cwiseMin(delta_);
        const VectorXd d = d_ - C_ * zc;
        const VectorXd s = detail::solve_box_qp(model_.hessian(), model_.gradient(), l, u, C_, d.cwiseMin(0.0));
        const double pred = -(model_.gradient().dot(s) + 0.5 * s.dot(model_.hessian() * s));
        const double fc = vals_[center_];

        if (s.lpNorm<Eigen::Infinity>() < 0.1 * delta_ || !(pred > 1e-14 * std::max(1.0, std::abs(fc)))) {
            // The model sees no useful progress at this radius.
            if (!geometry_step()) shrink_or_stop();
            return;
        }
        VectorXd z = zc + s;
        if (!repair(z) || duplicate(z)) {
            shrink_or_stop();
            return;
        }
        const std::size_t before = pts_.size();
        const bool ok = evaluate(z);
        if (!ok) {
            if (!done_) shrink_or_stop();
            return;
        }
        // evaluate() appended the point; fold it into the set properly.
        pts_.resize(before);
        vals_.resize(before);
        const double fn = result_.history.back().f;
        const double rho = (fc - fn) / pred;
        insert(z, fn, true);
        pick_center();
        if (done_) return;
        if (rho <= 0.1) {
            if (!geometry_step()) shrink_or_stop();
        } else if (rho > 0.7) {
            delta_ = std::min(std::max(delta_, 2.0 * s.lpNorm<Eigen::Infinity>()), 1.0);
        }
    }

    const OptProblem& p_;
    Eigen::Index n_;
    VectorXd lo_, range_, d_;
    MatrixXd C_, H_;
    double floor_ = 1e-4, delta_ = 0.1;
    std::size_t window_ = 3, stagnant_ = 0, center_ = 0;
    std::vector<VectorXd> pts_;
    std::vector<double> vals_;
    detail::QuadraticModel model_;
    OptResult result_;
    bool done_ = false;
};

}  // namespace

OptResult optimize(const OptProblem& problem) {
    validate(problem);
    return TrustRegion(problem).run();
}

}  // namespace nozzle
