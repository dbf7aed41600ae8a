#include <wpmec/solver.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace wpmec {

namespace {

constexpr double kMaxPoints = 5e7;

double upper_energy(const Link& l, double mu0, double mu) {
    double hi = l.power_cap * mu;
    if (l.supply) {
        hi = std::min(hi, l.supply->stored + std::min(l.supply->harvest_slope * mu0,
                                                      l.supply->harvest_cap));
    }
    return std::max(hi, 0.0);
}

double link_term(const AllocationInstance& inst, const Link& l, double u, double mu) {
    const double r = perspective_rate(l.gain, u, mu);
    double f = inst.utility == Utility::Weighted ? l.weight * r : -std::log1p(l.weight * r);
    if (l.kind == LinkKind::Battery) {
        f += l.energy_price * u;
    }
    return f;
}

/// Energy minimizing one battery link's term for fixed (mu0, mu).
double best_energy(const AllocationInstance& inst, const Link& l, double mu0, double mu) {
    const double hi = upper_energy(l, mu0, mu);
    if (hi <= 0.0 || mu <= 0.0) {
        return 0.0;
    }
    const bool rewards = inst.utility == Utility::Weighted ? l.weight < 0.0 : l.weight > 0.0;
    if (!rewards) {
        return l.energy_price < 0.0 ? hi : 0.0;
    }
    if (l.energy_price <= 0.0) {
        return hi;
    }
    if (inst.utility == Utility::Weighted) {
        // Stationary point of w*mu*log2(1 + b e/mu) + p e.
        const double e = mu * (-l.weight / (l.energy_price * std::numbers::ln2) - 1.0 / l.gain);
        return std::clamp(e, 0.0, hi);
    }
    // Convex in e without a closed form: golden section.
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0;
    double b = hi;
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    double fc = link_term(inst, l, c, mu);
    double fd = link_term(inst, l, d, mu);
    for (int it = 0; it < 200 && b - a > 1e-15 * hi; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = link_term(inst, l, c, mu);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = link_term(inst, l, d, mu);
        }
    }
    const double mid = 0.5 * (a + b);
    double best = mid;
    double fbest = link_term(inst, l, mid, mu);
    for (double cand : {0.0, hi}) {
        const double fc2 = link_term(inst, l, cand, mu);
        if (fc2 < fbest) {
            fbest = fc2;
            best = cand;
        }
    }
    return best;
}

/// True when growing any airtime share can only lower the objective, so an
/// optimum lies on the face where the whole budget is used.
bool budget_face_suffices(const AllocationInstance& inst) {
    if (inst.wpt_weight > 0.0) {
        return false;
    }
    for (const auto& l : inst.links) {
        const bool rewards = inst.utility == Utility::Weighted ? l.weight <= 0.0 : l.weight >= 0.0;
        if (!rewards) {
            return false;
        }
    }
    return true;
}

}  // namespace

AllocationResult grid_oracle(const AllocationInstance& inst, double resolution) {
    if (!(resolution > 0.0)) {
        throw std::invalid_argument("grid_oracle: resolution must be > 0");
    }
    const std::size_t k = inst.links.size();
    const std::size_t shares = inst.equal_time ? 1 : 1 + k;
    if (shares > 3) {
        throw std::invalid_argument("grid_oracle: " + std::to_string(shares) +
                                    " airtime variables, at most 3 supported");
    }

    double floors = 0.0;
    double max_floor = 0.0;
    for (const auto& l : inst.links) {
        floors += l.floor;
        max_floor = std::max(max_floor, l.floor);
    }
    const double free = inst.budget - (inst.equal_time ? static_cast<double>(k) * max_floor : floors);
    if (free < 0.0) {
        throw InfeasibleAllocation("grid_oracle: floors exceed the time budget");
    }

    const bool face = k > 0 && !inst.equal_time && budget_face_suffices(inst);
    const auto steps = static_cast<long long>(std::floor(free / resolution + 1e-9));
    const std::size_t dims = face ? shares - 1 : shares;
    double count = 1.0;
    for (std::size_t d = 0; d < dims; ++d) {
        count *= static_cast<double>(steps + 1);
    }
    if (count > kMaxPoints) {
        throw std::invalid_argument("grid_oracle: grid of " + std::to_string(count) +
                                    " points is too large");
    }

    AllocationPoint p;
    p.mu.assign(k, 0.0);
    p.energy.assign(k, 0.0);
    AllocationResult best;
    best.objective = std::numeric_limits<double>::infinity();

    auto evaluate = [&](double mu0) {
        for (std::size_t i = 0; i < k; ++i) {
            const Link& l = inst.links[i];
            p.energy[i] = l.kind == LinkKind::Battery ? best_energy(inst, l, mu0, p.mu[i]) : 0.0;
        }
        p.mu0 = mu0;
        double f = inst.wpt_weight * mu0;
        for (std::size_t i = 0; i < k; ++i) {
            const Link& l = inst.links[i];
            f += link_term(inst, l, l.kind == LinkKind::Harvest ? mu0 : p.energy[i], p.mu[i]);
        }
        if (f < best.objective) {
            best.objective = f;
            best.point = p;
        }
    };

    auto extra = [&](long long j) {
        return j == steps ? free : std::min(static_cast<double>(j) * resolution, free);
    };

    if (inst.equal_time && k > 0) {
        // The whole budget is always in use; only mu0 is free.
        const double kd = static_cast<double>(k);
        for (long long j = 0; j <= steps; ++j) {
            const double mu0 = extra(j);
            for (std::size_t i = 0; i < k; ++i) {
                p.mu[i] = (inst.budget - mu0) / kd;
            }
            evaluate(mu0);
        }
    } else if (k == 0) {
        for (long long j = face ? steps : 0; j <= steps; ++j) {
            evaluate(extra(j));
        }
    } else if (k == 1) {
        for (long long j0 = 0; j0 <= steps; ++j0) {
            const double x0 = extra(j0);
            if (face) {
                p.mu[0] = inst.links[0].floor + (free - x0);
                evaluate(x0);
                continue;
            }
            for (long long j1 = 0; j0 + j1 <= steps; ++j1) {
                p.mu[0] = inst.links[0].floor + extra(j1);
                evaluate(x0);
            }
        }
    } else {
        for (long long j0 = 0; j0 <= steps; ++j0) {
            const double x0 = extra(j0);
            for (long long j1 = 0; j0 + j1 <= steps; ++j1) {
                const double x1 = extra(j1);
                p.mu[0] = inst.links[0].floor + x1;
                if (face) {
                    p.mu[1] = inst.links[1].floor + std::max(free - x0 - x1, 0.0);
                    evaluate(x0);
                    continue;
                }
                for (long long j2 = 0; j0 + j1 + j2 <= steps; ++j2) {
                    p.mu[1] = inst.links[1].floor + extra(j2);
                    evaluate(x0);
                }
            }
        }
    }
    best.objective = objective_value(inst, best.point);
    return best;
}

}  // namespace wpmec
