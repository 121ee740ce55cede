#include "collapsar/blowup.hpp"

#include <cmath>
#include <unordered_map>

#include "collapsar/energy.hpp"
#include "collapsar/errors.hpp"
#include "collapsar/spectral.hpp"

namespace collapsar {

double radial_deviation(const Field& f) {
    if (f.rep() != Rep::position)
        throw ContractViolation("radial_deviation: field must be in position representation");

    const Grid& g = f.grid();
    const int n = g.n;

    // group nodes by exact integer squared radius in cell units, average f
    // over each shell
    std::unordered_map<long long, std::pair<cplx, long long>> shells;
    for (int i = 0; i < n; ++i) {
        long long a = i - n / 2;
        for (int j = 0; j < n; ++j) {
            long long b = j - n / 2;
            for (int l = 0; l < n; ++l) {
                long long c = l - n / 2;
                auto& slot = shells[a * a + b * b + c * c];
                slot.first += f.at(i, j, l);
                slot.second += 1;
            }
        }
    }
    double dev2 = 0.0;
    for (int i = 0; i < n; ++i) {
        long long a = i - n / 2;
        for (int j = 0; j < n; ++j) {
            long long b = j - n / 2;
            for (int l = 0; l < n; ++l) {
                long long c = l - n / 2;
                const auto& slot = shells[a * a + b * b + c * c];
                cplx avg = slot.first / static_cast<double>(slot.second);
                dev2 += std::norm(f.at(i, j, l) - avg);
            }
        }
    }
    double nrm = l2_norm(f);
    if (!(nrm > 0.0)) throw ContractViolation("radial_deviation: zero field");
    return std::sqrt(dev2 * g.cell_volume()) / nrm;
}

FLCriterion fl_check(const Field& f, double lambda,
                     const InteractionKernel& kernel, double radial_tol) {
    if (f.rep() != Rep::position)
        throw ContractViolation("fl_check: field must be in position representation");
    if (!(radial_tol > 0.0))
        throw ContractViolation("fl_check: radial tolerance must be positive");

    const Grid& g = f.grid();
    const int n = g.n;
    FLCriterion out;

    out.radial_deviation = radial_deviation(f);
    out.radial = out.radial_deviation <= radial_tol;

    out.energy_total = energy(f, lambda, kernel).total;
    out.energy_negative = out.energy_total < 0.0;

    double var = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = g.position(i);
        for (int j = 0; j < n; ++j) {
            double y = g.position(j);
            for (int l = 0; l < n; ++l) {
                double z = g.position(l);
                var += (x * x + y * y + z * z) * std::norm(f.at(i, j, l));
            }
        }
    }
    out.variance = var * g.cell_volume();
    out.variance_finite = std::isfinite(out.variance);

    out.eligible = out.radial && out.energy_negative && out.variance_finite;
    return out;
}

double tail_fraction(const Field& f) {
    const Field hat = (f.rep() == Rep::position) ? to_frequency(f) : f;
    const Grid& g = hat.grid();
    const int n = g.n;
    double total = 0.0, outer = 0.0;
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i) {
        int si = std::abs(g.signed_index(i));
        for (int j = 0; j < n; ++j) {
            int sj = std::abs(g.signed_index(j));
            int sij = std::max(si, sj);
            for (int l = 0; l < n; ++l, ++idx) {
                int s = std::max(sij, std::abs(g.signed_index(l)));
                double p = std::norm(hat[idx]);
                total += p;
                // outer third of the lattice: |k|_inf >= (2/3) * nyquist,
                // i.e. 3|s| >= n in index units
                if (3 * s >= n) outer += p;
            }
        }
    }
    if (!(total > 0.0)) throw ContractViolation("tail_fraction: zero field");
    return outer / total;
}

BlowupVerdict check(const std::vector<double>& times,
                    const std::vector<double>& h_half,
                    const std::vector<double>& tail,
                    double h_half_factor, double tail_max) {
    if (times.size() != h_half.size() || times.size() != tail.size())
        throw ContractViolation("blowup check: series lengths differ");
    if (times.empty())
        throw ContractViolation("blowup check: empty series");
    if (!(h_half_factor > 1.0) || !(tail_max > 0.0))
        throw ContractViolation("blowup check: thresholds out of range");

    BlowupVerdict v;
    const double h0 = h_half.front();
    for (std::size_t i = 0; i < times.size(); ++i) {
        bool by_norm = h_half[i] >= h_half_factor * h0;
        bool by_tail = tail[i] >= tail_max;
        if (by_norm || by_tail) {
            v.detected = true;
            v.reason = by_norm ? BlowupVerdict::Reason::h_half_threshold
                               : BlowupVerdict::Reason::tail_threshold;
            v.t_detect = times[i];
            v.h_half_at_detect = h_half[i];
            v.tail_at_detect = tail[i];
            return v;
        }
    }
    return v;
}

} // namespace collapsar
