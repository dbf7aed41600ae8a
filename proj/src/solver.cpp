#include <wpmec/solver.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace wpmec {

double optimal_collection(double queue, double collectible, double control_v) {
    if (control_v >= (collectible + 1.0) * queue) {
        return collectible;
    }
    return std::max(control_v / queue - 1.0, 0.0);
}

Partition prune(std::span<const double> queue, std::span<const double> ap_queue,
                std::span<const DeviceKind> kinds) {
    if (queue.size() != ap_queue.size() || queue.size() != kinds.size()) {
        throw std::invalid_argument("prune: vectors differ in length");
    }
    Partition out;
    for (std::size_t i = 0; i < queue.size(); ++i) {
        if (ap_queue[i] >= queue[i]) {
            out.pruned.push_back(i);
        } else if (kinds[i] == DeviceKind::TypeI) {
            out.type1.push_back(i);
        } else {
            out.type2.push_back(i);
        }
    }
    return out;
}

double perspective_rate(double gain, double x, double mu) {
    if (mu <= 0.0) {
        return 0.0;
    }
    return mu * std::log1p(gain * x / mu) / std::numbers::ln2;
}

double link_rate(const AllocationInstance& inst, const AllocationPoint& p, std::size_t i) {
    const Link& l = inst.links[i];
    const double x = l.kind == LinkKind::Harvest ? p.mu0 : p.energy[i];
    return perspective_rate(l.gain, x, p.mu[i]);
}

namespace {

double supply_bound(const EnergySupply& s, double mu0) {
    return s.stored + std::min(s.harvest_slope * mu0, s.harvest_cap);
}

}  // namespace

bool is_feasible(const AllocationInstance& inst, const AllocationPoint& p, double tol) {
    const std::size_t k = inst.links.size();
    if (p.mu.size() != k || p.energy.size() != k) {
        return false;
    }
    if (p.mu0 < -tol) {
        return false;
    }
    double used = p.mu0;
    for (std::size_t i = 0; i < k; ++i) {
        const Link& l = inst.links[i];
        used += p.mu[i];
        if (p.mu[i] < l.floor - tol) {
            return false;
        }
        if (l.kind == LinkKind::Battery) {
            const double e = p.energy[i];
            if (e < -tol * l.power_cap || e > l.power_cap * p.mu[i] + tol * l.power_cap) {
                return false;
            }
            if (l.supply && e > supply_bound(*l.supply, p.mu0) * (1.0 + tol) + 1e-300) {
                return false;
            }
        } else if (p.energy[i] != 0.0) {
            return false;
        }
        if (inst.equal_time && std::abs(p.mu[i] - p.mu[0]) > tol) {
            return false;
        }
    }
    return used <= inst.budget + tol;
}

double objective_value(const AllocationInstance& inst, const AllocationPoint& p) {
    if (!is_feasible(inst, p)) {
        throw std::domain_error("objective_value: point is infeasible");
    }
    double f = inst.wpt_weight * p.mu0;
    for (std::size_t i = 0; i < inst.links.size(); ++i) {
        const Link& l = inst.links[i];
        const double r = link_rate(inst, p, i);
        f += inst.utility == Utility::Weighted ? l.weight * r : -std::log1p(l.weight * r);
        if (l.kind == LinkKind::Battery) {
            f += l.energy_price * p.energy[i];
        }
    }
    return f;
}

// ---------------------------------------------------------------------------
// Barrier solver
// ---------------------------------------------------------------------------

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// v * log2(1 + k u / v) with its first and second derivatives in (u, v).
struct PerspectiveTerm {
    double value, du, dv, duu, duv, dvv;
};

PerspectiveTerm perspective_term(double k, double u, double v) {
    constexpr double ln2 = std::numbers::ln2;
    const double s = v + k * u;
    const double ratio = k * u / v;
    PerspectiveTerm p{};
    p.value = v * std::log1p(ratio) / ln2;
    p.du = k * v / (s * ln2);
    p.dv = (std::log1p(ratio) - k * u / s) / ln2;
    const double c = k * k / (s * s * ln2);
    p.duu = -c * v;
    p.duv = c * u;
    p.dvv = -c * u * u / v;
    return p;
}

/// The instance in terms of the free variables x, with z = M x + c mapping to
/// (mu0, mu_1..mu_k, e_1..e_k) and constraints A x <= b.
class BarrierProblem {
public:
    explicit BarrierProblem(const AllocationInstance& inst) : inst_(inst), k_(inst.links.size()) {
        const std::size_t nz = 1 + 2 * k_;
        std::vector<std::size_t> battery;
        for (std::size_t i = 0; i < k_; ++i) {
            if (inst.links[i].kind == LinkKind::Battery) {
                battery.push_back(i);
            }
        }
        const std::size_t nx = (inst.equal_time ? 1 : 1 + k_) + battery.size();
        map_ = MatrixXd::Zero(static_cast<Eigen::Index>(nz), static_cast<Eigen::Index>(nx));
        offset_ = VectorXd::Zero(static_cast<Eigen::Index>(nz));
        map_(0, 0) = 1.0;
        for (std::size_t i = 0; i < k_; ++i) {
            const auto row = static_cast<Eigen::Index>(1 + i);
            if (inst.equal_time) {
                map_(row, 0) = -1.0 / static_cast<double>(k_);
                offset_(row) = inst.budget / static_cast<double>(k_);
            } else {
                map_(row, static_cast<Eigen::Index>(1 + i)) = 1.0;
            }
        }
        const std::size_t e_base = inst.equal_time ? 1 : 1 + k_;
        for (std::size_t j = 0; j < battery.size(); ++j) {
            map_(e_row(battery[j]), static_cast<Eigen::Index>(e_base + j)) = 1.0;
        }

        // Constraints on z, then pulled back to x.
        std::vector<std::pair<VectorXd, double>> rows;
        auto unit_row = [&](Eigen::Index idx, double coef) {
            VectorXd a = VectorXd::Zero(static_cast<Eigen::Index>(nz));
            a(idx) = coef;
            return a;
        };
        rows.emplace_back(unit_row(0, -1.0), 0.0);
        for (std::size_t i = 0; i < k_; ++i) {
            const Link& l = inst.links[i];
            rows.emplace_back(unit_row(mu_row(i), -1.0), -l.floor);
            if (l.kind == LinkKind::Battery) {
                rows.emplace_back(unit_row(e_row(i), -1.0), 0.0);
                VectorXd cap = unit_row(e_row(i), 1.0);
                cap(mu_row(i)) = -l.power_cap;
                rows.emplace_back(cap, 0.0);
                if (l.supply) {
                    VectorXd slope = unit_row(e_row(i), 1.0);
                    slope(0) = -l.supply->harvest_slope;
                    rows.emplace_back(slope, l.supply->stored);
                    rows.emplace_back(unit_row(e_row(i), 1.0),
                                      l.supply->stored + l.supply->harvest_cap);
                }
            }
        }
        if (!inst.equal_time) {
            VectorXd sum = VectorXd::Zero(static_cast<Eigen::Index>(nz));
            sum.head(static_cast<Eigen::Index>(1 + k_)).setOnes();
            rows.emplace_back(sum, inst.budget);
        }

        a_.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(nx));
        b_.resize(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto rr = static_cast<Eigen::Index>(r);
            a_.row(rr) = rows[r].first.transpose() * map_;
            b_(rr) = rows[r].second - rows[r].first.dot(offset_);
        }

        gz_.resize(static_cast<Eigen::Index>(nz));
        hz_.resize(static_cast<Eigen::Index>(nz), static_cast<Eigen::Index>(nz));
    }

    [[nodiscard]] Eigen::Index dim() const { return map_.cols(); }
    [[nodiscard]] Eigen::Index constraints() const { return a_.rows(); }
    [[nodiscard]] const MatrixXd& a() const { return a_; }
    [[nodiscard]] const VectorXd& b() const { return b_; }

    [[nodiscard]] VectorXd natural(const VectorXd& x) const { return map_ * x + offset_; }

    [[nodiscard]] VectorXd slack(const VectorXd& x) const { return b_ - a_ * x; }

    /// Objective value only.
    [[nodiscard]] double value(const VectorXd& x) const {
        const VectorXd z = natural(x);
        double f = inst_.wpt_weight * z(0);
        for (std::size_t i = 0; i < k_; ++i) {
            const Link& l = inst_.links[i];
            const double u = l.kind == LinkKind::Harvest ? z(0) : z(e_row(i));
            const double r = perspective_rate(l.gain, u, z(mu_row(i)));
            f += inst_.utility == Utility::Weighted ? l.weight * r : -std::log1p(l.weight * r);
            if (l.kind == LinkKind::Battery) {
                f += l.energy_price * z(e_row(i));
            }
        }
        return f;
    }

    /// Objective value, gradient and Hessian in x.
    double evaluate(const VectorXd& x, VectorXd& grad, MatrixXd& hess) {
        const VectorXd z = natural(x);
        gz_.setZero();
        hz_.setZero();
        double f = inst_.wpt_weight * z(0);
        gz_(0) = inst_.wpt_weight;
        for (std::size_t i = 0; i < k_; ++i) {
            const Link& l = inst_.links[i];
            const Eigen::Index iu = l.kind == LinkKind::Harvest ? 0 : e_row(i);
            const Eigen::Index iv = mu_row(i);
            const PerspectiveTerm p = perspective_term(l.gain, z(iu), z(iv));
            double w = l.weight;
            double w2 = 0.0;  // coefficient of the gradient outer product
            if (inst_.utility == Utility::Weighted) {
                f += w * p.value;
            } else {
                const double denom = 1.0 + l.weight * p.value;
                f -= std::log1p(l.weight * p.value);
                w = -l.weight / denom;
                w2 = l.weight * l.weight / (denom * denom);
            }
            gz_(iu) += w * p.du;
            gz_(iv) += w * p.dv;
            hz_(iu, iu) += w * p.duu + w2 * p.du * p.du;
            hz_(iu, iv) += w * p.duv + w2 * p.du * p.dv;
            hz_(iv, iu) += w * p.duv + w2 * p.du * p.dv;
            hz_(iv, iv) += w * p.dvv + w2 * p.dv * p.dv;
            if (l.kind == LinkKind::Battery) {
                f += l.energy_price * z(e_row(i));
                gz_(e_row(i)) += l.energy_price;
            }
        }
        grad.noalias() = map_.transpose() * gz_;
        hess.noalias() = map_.transpose() * hz_ * map_;
        return f;
    }

    /// Strictly feasible starting point: equal shares with slack left in
    /// the budget and half the admissible energy.
    [[nodiscard]] VectorXd start() const {
        double floors = 0.0;
        for (const auto& l : inst_.links) {
            floors += inst_.equal_time ? 0.0 : l.floor;
        }
        const double k = static_cast<double>(k_);
        VectorXd z = VectorXd::Zero(static_cast<Eigen::Index>(1 + 2 * k_));
        if (inst_.equal_time) {
            double max_floor = 0.0;
            for (const auto& l : inst_.links) {
                max_floor = std::max(max_floor, l.floor);
            }
            const double room = inst_.budget - k * max_floor;
            z(0) = room / 2.0;
            for (std::size_t i = 0; i < k_; ++i) {
                z(mu_row(i)) = (inst_.budget - z(0)) / k;
            }
        } else {
            const double share = (inst_.budget - floors) / (k + 2.0);
            z(0) = share;
            for (std::size_t i = 0; i < k_; ++i) {
                z(mu_row(i)) = inst_.links[i].floor + share;
            }
        }
        for (std::size_t i = 0; i < k_; ++i) {
            const Link& l = inst_.links[i];
            if (l.kind != LinkKind::Battery) {
                continue;
            }
            double hi = l.power_cap * z(mu_row(i));
            if (l.supply) {
                hi = std::min(hi, supply_bound(*l.supply, z(0)));
            }
            z(e_row(i)) = 0.5 * hi;
        }
        // Recover x from z: every free variable is a coordinate of z.
        VectorXd x(dim());
        x(0) = z(0);
        Eigen::Index next = 1;
        if (!inst_.equal_time) {
            for (std::size_t i = 0; i < k_; ++i) {
                x(next++) = z(mu_row(i));
            }
        }
        for (std::size_t i = 0; i < k_; ++i) {
            if (inst_.links[i].kind == LinkKind::Battery) {
                x(next++) = z(e_row(i));
            }
        }
        return x;
    }

    [[nodiscard]] AllocationPoint point(const VectorXd& x) const {
        const VectorXd z = natural(x);
        AllocationPoint p;
        p.mu0 = z(0);
        p.mu.resize(k_);
        p.energy.assign(k_, 0.0);
        for (std::size_t i = 0; i < k_; ++i) {
            p.mu[i] = z(mu_row(i));
            if (inst_.links[i].kind == LinkKind::Battery) {
                p.energy[i] = z(e_row(i));
            }
        }
        return p;
    }

private:
    [[nodiscard]] static Eigen::Index mu_row(std::size_t i) { return static_cast<Eigen::Index>(1 + i); }
    [[nodiscard]] Eigen::Index e_row(std::size_t i) const {
        return static_cast<Eigen::Index>(1 + k_ + i);
    }

    const AllocationInstance& inst_;
    std::size_t k_;
    MatrixXd map_;
    VectorXd offset_;
    MatrixXd a_;
    VectorXd b_;
    VectorXd gz_;
    MatrixXd hz_;
};

double barrier_value(const BarrierProblem& prob, const VectorXd& x, double t, double scale) {
    const VectorXd s = prob.slack(x);
    if ((s.array() <= 0.0).any()) {
        return std::numeric_limits<double>::infinity();
    }
    return t * prob.value(x) / scale - s.array().log().sum();
}

/// Moves shares within `snap` of their floor onto it and restores the
/// energy caps that depend on them.
void polish(const AllocationInstance& inst, AllocationPoint& p, double snap) {
    if (p.mu0 < snap) {
        p.mu0 = 0.0;
    }
    for (std::size_t i = 0; i < inst.links.size(); ++i) {
        const Link& l = inst.links[i];
        if (!inst.equal_time && p.mu[i] - l.floor < snap) {
            p.mu[i] = l.floor;
        }
        if (l.kind == LinkKind::Battery) {
            double hi = l.power_cap * p.mu[i];
            if (l.supply) {
                hi = std::min(hi, supply_bound(*l.supply, p.mu0));
            }
            p.energy[i] = std::clamp(p.energy[i], 0.0, std::max(hi, 0.0));
        }
    }
}

/// Best energy for one battery link with its share fixed. The objective is
/// convex in e, so bisect on the sign of its derivative.
double pinned_energy(const AllocationInstance& inst, const Link& l, double mu, double mu0) {
    double hi = l.power_cap * mu;
    if (l.supply) {
        hi = std::min(hi, supply_bound(*l.supply, mu0));
    }
    if (!(hi > 0.0) || mu <= 0.0) {
        return 0.0;
    }
    auto slope = [&](double e) {
        const double dr = l.gain / (std::numbers::ln2 * (1.0 + l.gain * e / mu));
        const double du = inst.utility == Utility::Weighted
                              ? l.weight * dr
                              : -l.weight * dr / (1.0 + l.weight * perspective_rate(l.gain, e, mu));
        return du + l.energy_price;
    };
    if (slope(0.0) >= 0.0) {
        return 0.0;
    }
    if (slope(hi) <= 0.0) {
        return hi;
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (slope(mid) < 0.0 ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace

AllocationResult solve_joint(const AllocationInstance& inst, const SolverOptions& opts) {
    const std::size_t k = inst.links.size();
    if (!(inst.budget >= 0.0)) {
        throw InfeasibleAllocation("solve_joint: negative time budget");
    }

    // No link to schedule: the objective is linear in mu0 alone.
    if (k == 0) {
        AllocationResult r;
        r.point.mu0 = inst.wpt_weight < 0.0 ? inst.budget : 0.0;
        r.objective = inst.wpt_weight * r.point.mu0;
        return r;
    }

    double floors = 0.0;
    double max_floor = 0.0;
    for (const auto& l : inst.links) {
        floors += l.floor;
        max_floor = std::max(max_floor, l.floor);
    }
    const double needed = inst.equal_time ? static_cast<double>(k) * max_floor : floors;
    if (needed >= inst.budget) {
        throw InfeasibleAllocation("solve_joint: floors need " + std::to_string(needed) +
                                   " of a time budget of " + std::to_string(inst.budget));
    }

    // Floors that fill the slot to rounding leave no interior: pin every
    // share and choose only the energies.
    if (inst.budget - needed <= 1e-9 * std::max(inst.budget, 1.0)) {
        AllocationResult r;
        r.point.mu.resize(k);
        r.point.energy.assign(k, 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            r.point.mu[i] = inst.equal_time ? max_floor : inst.links[i].floor;
        }
        r.point.mu0 = std::max(inst.budget - needed, 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            if (inst.links[i].kind == LinkKind::Battery) {
                r.point.energy[i] = pinned_energy(inst, inst.links[i], r.point.mu[i], r.point.mu0);
            }
        }
        r.objective = objective_value(inst, r.point);
        return r;
    }

    BarrierProblem prob(inst);
    const Eigen::Index n = prob.dim();
    const auto m = static_cast<double>(prob.constraints());

    VectorXd x = prob.start();
    VectorXd grad(n), dx(n), gbar(n);
    MatrixXd hess(n, n), hbar(n, n);

    double scale = 0.0;
    {
        const double f0 = prob.evaluate(x, grad, hess);
        scale = std::max({std::abs(f0), grad.lpNorm<Eigen::Infinity>(), 1e-300});
    }

    double t = 1.0;
    int iterations = 0;
    double residual = std::numeric_limits<double>::infinity();
    Eigen::LDLT<MatrixXd> ldlt(n);

    auto snapshot = [&](const VectorXd& xs) {
        AllocationResult r;
        r.point = prob.point(xs);
        polish(inst, r.point, opts.snap);
        r.objective = objective_value(inst, r.point);
        r.kkt_residual = residual;
        r.iterations = iterations;
        return r;
    };

    for (;;) {
        // Centering: minimize t*f/scale - sum log(slack).
        int unchecked = 0;  // full steps taken without a value check
        for (;;) {
            prob.evaluate(x, grad, hess);
            const VectorXd s = prob.slack(x);
            const VectorXd inv = s.cwiseInverse();
            gbar = (t / scale) * grad + prob.a().transpose() * inv;
            hbar = (t / scale) * hess +
                   prob.a().transpose() * inv.cwiseAbs2().asDiagonal() * prob.a();

            // Symmetric Jacobi scaling: shares and Joules differ by orders of magnitude.
            const VectorXd dscale = hbar.diagonal().cwiseAbs().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
            hbar = dscale.asDiagonal() * hbar * dscale.asDiagonal();
            ldlt.compute(hbar);
            dx = ldlt.solve(-dscale.cwiseProduct(gbar));
            if (ldlt.info() != Eigen::Success || !dx.allFinite() ||
                gbar.dot(dscale.cwiseProduct(dx)) >= 0.0) {
                // Regularize when the Hessian lost definiteness to rounding.
                hbar.diagonal().array() += 1e-12;
                dx = hbar.llt().solve(-dscale.cwiseProduct(gbar));
                if (!dx.allFinite() || gbar.dot(dscale.cwiseProduct(dx)) >= 0.0) {
                    dx = -dscale.cwiseProduct(gbar);
                }
            }
            dx = dscale.cwiseProduct(dx);
            // gbar / t is the stationarity residual with duals 1 / (t s).
            const double decrement = -gbar.dot(dx);
            if (gbar.lpNorm<Eigen::Infinity>() <= 0.1 * opts.tol * t || decrement / 2.0 <= 1e-20) {
                break;
            }

            // Stay strictly inside the feasible set.
            const VectorXd ad = prob.a() * dx;
            double step = 1.0;
            for (Eigen::Index r = 0; r < ad.size(); ++r) {
                if (ad(r) > 0.0) {
                    step = std::min(step, 0.99 * s(r) / ad(r));
                }
            }
            // Close to the center the barrier value no longer resolves the
            // decrease; quadratic convergence makes the full step safe there.
            if (decrement > 1e-6) {
                const double f_now = barrier_value(prob, x, t, scale);
                double f_new = barrier_value(prob, x + step * dx, t, scale);
                while (step > 1e-18 && f_new > f_now - 0.25 * step * decrement) {
                    step *= 0.5;
                    f_new = barrier_value(prob, x + step * dx, t, scale);
                }
                if (step <= 1e-18 || !(f_new < f_now)) {
                    break;  // no representable progress left at this t
                }
            } else if (++unchecked > 8 ||
                       !std::isfinite(barrier_value(prob, x + step * dx, t, scale))) {
                break;  // quadratic convergence needs only a few of these
            }
            const VectorXd moved = step * dx;
            x += moved;
            if (++iterations >= opts.max_newton) {
                throw SolverDivergence("solve_joint: Newton budget exhausted", snapshot(x));
            }
            if ((moved.array().abs() <= 1e-15 * (x.array().abs() + 1e-300)).all()) {
                break;
            }
        }

        // Dual estimate lambda_r = 1 / (t * slack_r) gives the stationarity residual.
        prob.evaluate(x, grad, hess);
        const VectorXd slack = prob.slack(x);
        const VectorXd lambda = slack.cwiseInverse() / t;
        double stationarity =
            (grad / scale + prob.a().transpose() * lambda).lpNorm<Eigen::Infinity>();
        // Tiny slacks carry few significant digits, so 1 / (t s) is noisy late
        // in the schedule. Refit the multipliers of the active rows by least
        // squares and keep that certificate when it is valid and tighter.
        std::vector<Eigen::Index> active;
        for (Eigen::Index r = 0; r < slack.size(); ++r) {
            if (lambda(r) > slack(r)) {
                active.push_back(r);
            }
        }
        if (!active.empty()) {
            MatrixXd at(prob.a().cols(), static_cast<Eigen::Index>(active.size()));
            for (std::size_t k = 0; k < active.size(); ++k) {
                at.col(static_cast<Eigen::Index>(k)) = prob.a().row(active[k]).transpose();
            }
            const VectorXd lam = at.colPivHouseholderQr().solve(-grad / scale);
            if (lam.allFinite() && (lam.array() >= 0.0).all()) {
                double comp = 0.0;
                for (std::size_t k = 0; k < active.size(); ++k) {
                    comp += lam(static_cast<Eigen::Index>(k)) * slack(active[k]);
                }
                const double refit =
                    std::max((grad / scale + at * lam).lpNorm<Eigen::Infinity>(), comp);
                stationarity = std::min(stationarity, refit);
            }
        } else {
            stationarity = std::min(stationarity, (grad / scale).lpNorm<Eigen::Infinity>());
        }
        residual = std::max(stationarity, m / t);
        // Centering accuracy is limited by rounding once t is large; stop a
        // few decades past the duality target even if it is not reached.
        if (m / t < opts.tol && (stationarity <= opts.tol || m / t < 1e-4 * opts.tol)) {
            break;
        }
        if (t > 1e30) {
            throw SolverDivergence("solve_joint: barrier parameter overflow", snapshot(x));
        }
        t *= 10.0;
    }
    return snapshot(x);
}

}  // namespace wpmec
