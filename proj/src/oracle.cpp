#include "weakpointer/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "weakpointer/gaussian.hpp"

namespace weakpointer {

namespace {

using Eigen::ArrayXcd;
using Eigen::ArrayXd;

struct Axis {
    double h = 0.0;      // grid spacing
    long shift = 0;      // delta in cells
    ArrayXd x;           // sample positions
};

// Row-major layout, axis n-1 fastest. stride(m) = points^(n_axes-1-m).
long axis_stride(int axis, int n_axes, long n) {
    long s = 1;
    for (int a = n_axes - 1; a > axis; --a) s *= n;
    return s;
}

ArrayXcd roll_axis(const ArrayXcd& in, int axis, int n_axes, long n, long r) {
    if (r == 0) return in;
    ArrayXcd out = ArrayXcd::Zero(in.size());
    const long stride = axis_stride(axis, n_axes, n);
    const long outer = in.size() / (n * stride);
    const long lo = std::max(0L, r), hi = std::min(n, n + r);
    for (long o = 0; o < outer; ++o)
        for (long i = lo; i < hi; ++i)
            out.segment(o * n * stride + i * stride, stride) =
                in.segment(o * n * stride + (i - r) * stride, stride);
    return out;
}

// sum_idx w(i_axis) * |in(idx)|^2
double axis_weighted_norm(const ArrayXcd& in, int axis, int n_axes, long n, const ArrayXd& w) {
    const long stride = axis_stride(axis, n_axes, n);
    const long outer = in.size() / (n * stride);
    double s = 0.0;
    for (long o = 0; o < outer; ++o)
        for (long i = 0; i < n; ++i)
            s += w[i] * in.segment(o * n * stride + i * stride, stride).abs2().sum();
    return s;
}

struct PortAccumulator {
    double prob = 0.0;
    std::vector<double> first;   // per device: sum x |psi|^2
    std::vector<double> second;  // per device: sum x^2 |psi|^2
};

}  // namespace

GridResult grid_simulate(const Circuit& c, const PathId& source,
                         const std::vector<MeterDevice>& devices, const GridSpec& grid) {
    validate_devices(c, devices);
    const int nd = static_cast<int>(devices.size());
    if (nd > 3) throw GridError("grid oracle supports at most 3 devices");
    if (grid.points < 512) throw GridError("grid needs at least 512 points");
    if (grid.points % 2 != 0) throw GridError("grid point count must be even");
    if (grid.half_width < 8.0)
        throw GridError("half_width below 8 sigma truncates too much Gaussian mass");

    const long n = grid.points;

    std::vector<Axis> axes(nd);
    GridResult res;
    res.grid = grid;
    for (int m = 0; m < nd; ++m) {
        Axis& ax = axes[m];
        ax.h = 2.0 * grid.half_width * devices[m].sigma / static_cast<double>(n);
        ax.shift = std::lround(devices[m].delta / ax.h);
        if (devices[m].delta != 0.0 && std::abs(devices[m].delta) < ax.h)
            throw GridError("delta " + std::to_string(devices[m].delta) + " of device '" +
                            devices[m].id + "' is below the grid spacing " +
                            std::to_string(ax.h) + "; increase points or shrink half_width");
        ax.x = ArrayXd::LinSpaced(n, 0, static_cast<double>(n - 1));
        ax.x = (ax.x - static_cast<double>(n) / 2.0) * ax.h;
        res.snapped_deltas[devices[m].id] = static_cast<double>(ax.shift) * ax.h;
        res.snap_errors[devices[m].id] =
            std::abs(devices[m].delta - res.snapped_deltas[devices[m].id]);
    }

    // Initial joint state: outer product of centered meter Gaussians,
    // normalized on the grid (counting measure; the cell volume cancels in
    // every reported ratio).
    ArrayXcd init = ArrayXcd::Constant(1, 1.0);
    for (int m = 0; m < nd; ++m) {
        ArrayXd g(n);
        for (long j = 0; j < n; ++j)
            g[j] = gaussian_amplitude(axes[m].x[j], 0.0, devices[m].sigma);
        ArrayXcd next(init.size() * n);
        for (long i = 0; i < init.size(); ++i)
            next.segment(i * n, n) = init[i] * g.cast<cplx>();
        init = std::move(next);
    }
    init /= std::sqrt(init.abs2().sum());

    std::map<PathId, ArrayXcd> live;
    live.emplace(source, std::move(init));
    c.path_index(0, source);

    std::map<PathId, PortAccumulator> captured;
    auto capture = [&](const PathId& port, const ArrayXcd& t) {
        PortAccumulator& acc = captured[port];
        if (acc.first.empty()) {
            acc.first.assign(nd, 0.0);
            acc.second.assign(nd, 0.0);
        }
        acc.prob += t.abs2().sum();
        for (int m = 0; m < nd; ++m) {
            acc.first[m] += axis_weighted_norm(t, m, nd, n, axes[m].x);
            acc.second[m] += axis_weighted_norm(t, m, nd, n, axes[m].x.square());
        }
    };

    res.fluxes.resize(c.num_stages());
    double clicked = 0.0;
    for (int k = 0;; ++k) {
        for (int m = 0; m < nd; ++m)
            if (devices[m].stage == k) {
                auto it = live.find(devices[m].path);
                if (it != live.end())
                    it->second = roll_axis(it->second, m, nd, n, axes[m].shift);
            }

        double total = clicked;
        for (const auto& [p, t] : live) {
            const double f = t.abs2().sum();
            res.fluxes[k][p] = f;
            total += f;
        }
        res.max_norm_drift = std::max(res.max_norm_drift, std::abs(total - 1.0));

        for (int i : c.absorbers_at(k)) {
            const PathId& p = c.stage_paths(k)[i];
            auto it = live.find(p);
            if (it == live.end()) {
                capture(p, ArrayXcd::Zero(1));
                continue;
            }
            clicked += it->second.abs2().sum();
            capture(p, it->second);
            live.erase(it);
        }

        if (k == c.last_stage()) break;

        const Mat& t = c.transfer(k);
        std::map<PathId, ArrayXcd> next;
        for (const auto& [p, tensor] : live) {
            const int i = c.path_index(k, p);
            for (int j = 0; j < t.rows(); ++j) {
                const cplx w = t(j, i);
                if (w == cplx(0.0)) continue;
                const PathId& q = c.stage_paths(k + 1)[j];
                auto it = next.find(q);
                if (it == next.end())
                    next.emplace(q, w * tensor);
                else
                    it->second += w * tensor;
            }
        }
        live = std::move(next);
    }

    for (const auto& term : c.terminals()) {
        auto it = live.find(term);
        if (it != live.end()) capture(term, it->second);
        else captured[term];  // port exists with zero probability
    }

    for (auto& [port, acc] : captured) {
        GridPortResult r;
        r.probability = acc.prob;
        if (acc.prob >= kPostselectionTol && !acc.first.empty()) {
            for (int m = 0; m < nd; ++m) {
                const double mean = acc.first[m] / acc.prob;
                r.means[devices[m].id] = mean;
                r.variances[devices[m].id] = acc.second[m] / acc.prob - mean * mean;
                const double snapped = res.snapped_deltas[devices[m].id];
                if (snapped != 0.0) r.weak_estimates[devices[m].id] = mean / snapped;
            }
        }
        res.ports[port] = std::move(r);
    }

    return res;
}

}  // namespace weakpointer
