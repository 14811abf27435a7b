#include "sepspec/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "sepspec/error.hpp"
#include "sepspec/linalg.hpp"
#include "sepspec/rng.hpp"

namespace sepspec {

namespace {

constexpr std::uint64_t kTagMap = 0x6d6170;      // "map"
constexpr std::uint64_t kTagCenters = 0x63747273;  // "ctrs"

std::size_t intrinsic_dim(SyntheticKind k) {
    switch (k) {
        case SyntheticKind::moon:
        case SyntheticKind::two_circles:
        case SyntheticKind::line:
            return 2;
        case SyntheticKind::tangent_spheres:
        case SyntheticKind::cylinders:
            return 3;
        case SyntheticKind::two_clusters_timeseries:
            return 10;
    }
    throw std::invalid_argument("unknown synthetic kind");
}

// Seeded random linear map with orthonormal columns, lifting intrinsic
// coordinates into the ambient space. Identity when the dimensions agree, so
// low-dimensional fixtures stay recognizable.
Matrix ambient_map(std::size_t ambient, std::size_t intrinsic, Rng rng) {
    if (ambient == intrinsic) return Matrix::identity(intrinsic);
    Matrix g(ambient, intrinsic);
    for (std::size_t r = 0; r < ambient; ++r) {
        for (std::size_t c = 0; c < intrinsic; ++c) g(r, c) = rng.normal();
    }
    return qr(g).q;
}

Matrix lift(const Matrix& low, const Matrix& map) {
    Matrix out;
    matmul_nt(low, map, out);  // (n x k) * (ambient x k)^T
    return out;
}

void gen_moon(std::size_t n, double noise, Rng& rng, Matrix& pts) {
    pts.resize(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = rng.uniform(0.0, std::numbers::pi);
        pts(i, 0) = std::cos(t) + noise * rng.normal();
        pts(i, 1) = std::sin(t) + noise * rng.normal();
    }
}

void gen_two_circles(std::size_t n, double noise, Rng& rng, Matrix& pts,
                     std::vector<std::int32_t>& labels) {
    pts.resize(n, 2);
    labels.resize(n);
    const std::size_t outer = n - n / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const bool inner = i >= outer;
        const double r = inner ? 0.5 : 1.0;
        const double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
        pts(i, 0) = r * std::cos(t) + noise * rng.normal();
        pts(i, 1) = r * std::sin(t) + noise * rng.normal();
        labels[i] = inner ? 1 : 0;
    }
}

void gen_tangent_spheres(std::size_t n, double noise, Rng& rng, Matrix& pts,
                         std::vector<std::int32_t>& labels) {
    pts.resize(n, 3);
    labels.resize(n);
    const std::size_t first = n - n / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const bool second = i >= first;
        // Uniform on the unit sphere via a normalized Gaussian.
        double x = rng.normal(), y = rng.normal(), z = rng.normal();
        double norm = std::sqrt(x * x + y * y + z * z);
        while (norm < 1e-12) {
            x = rng.normal();
            y = rng.normal();
            z = rng.normal();
            norm = std::sqrt(x * x + y * y + z * z);
        }
        // Spheres of radius 1 centered at x = 0 and x = 2 touch at (1, 0, 0).
        pts(i, 0) = (second ? 2.0 : 0.0) + x / norm + noise * rng.normal();
        pts(i, 1) = y / norm + noise * rng.normal();
        pts(i, 2) = z / norm + noise * rng.normal();
        labels[i] = second ? 1 : 0;
    }
}

void gen_cylinders(std::size_t n, double noise, Rng& rng, Matrix& pts,
                   std::vector<std::int32_t>& labels) {
    pts.resize(n, 3);
    labels.resize(n);
    const std::size_t first = n - n / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const bool second = i >= first;
        const double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double z = rng.uniform(-2.0, 2.0);
        pts(i, 0) = (second ? 4.0 : 0.0) + std::cos(t) + noise * rng.normal();
        pts(i, 1) = std::sin(t) + noise * rng.normal();
        pts(i, 2) = z + noise * rng.normal();
        labels[i] = second ? 1 : 0;
    }
}

void gen_line(std::size_t n, double noise, Rng& rng, Matrix& pts) {
    pts.resize(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        pts(i, 0) = rng.uniform01() + noise * rng.normal();
        pts(i, 1) = noise * rng.normal();
    }
}

void gen_timeseries(const GenSpec& spec, Rng& rng, Matrix& pts, std::vector<std::int32_t>& labels) {
    const std::size_t d = spec.ambient_dim;
    // Static cluster centers depend on the seed only, never on the step, so
    // every time slice shares the same two anchor distributions.
    Rng crng = Rng(spec.seed).fork(kTagCenters);
    std::vector<double> ca(d), cb(d);
    for (std::size_t c = 0; c < d; ++c) ca[c] = 5.0 * crng.normal();
    for (std::size_t c = 0; c < d; ++c) cb[c] = 5.0 * crng.normal();

    const std::size_t n_dyn = spec.n / 4;
    const std::size_t n_static = spec.n - n_dyn;
    const std::size_t n_a = n_static - n_static / 2;
    const double alpha = spec.step / 9.0;  // 0 at the first step, 1 at the last

    pts.resize(spec.n, d);
    labels.resize(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const double* center;
        std::vector<double> cdyn(d);
        std::int32_t label;
        if (i < n_a) {
            center = ca.data();
            label = 0;
        } else if (i < n_static) {
            center = cb.data();
            label = 1;
        } else {
            for (std::size_t c = 0; c < d; ++c) cdyn[c] = (1.0 - alpha) * ca[c] + alpha * cb[c];
            center = cdyn.data();
            label = 2;
        }
        for (std::size_t c = 0; c < d; ++c) pts(i, c) = center[c] + spec.noise * rng.normal();
        labels[i] = label;
    }
}

}  // namespace

const char* kind_name(SyntheticKind k) {
    switch (k) {
        case SyntheticKind::moon: return "moon";
        case SyntheticKind::two_circles: return "two_circles";
        case SyntheticKind::tangent_spheres: return "tangent_spheres";
        case SyntheticKind::cylinders: return "cylinders";
        case SyntheticKind::line: return "line";
        case SyntheticKind::two_clusters_timeseries: return "two_clusters_timeseries";
    }
    return "unknown";
}

SyntheticKind kind_from_name(const std::string& name) {
    if (name == "moon") return SyntheticKind::moon;
    if (name == "two_circles") return SyntheticKind::two_circles;
    if (name == "tangent_spheres") return SyntheticKind::tangent_spheres;
    if (name == "cylinders") return SyntheticKind::cylinders;
    if (name == "line") return SyntheticKind::line;
    if (name == "two_clusters_timeseries") return SyntheticKind::two_clusters_timeseries;
    throw std::invalid_argument("unknown synthetic kind: " + name);
}

Dataset gen_synthetic(const GenSpec& spec) {
    if (spec.n < 2) throw std::invalid_argument("gen_synthetic: need n >= 2");
    if (spec.noise < 0.0) throw std::invalid_argument("gen_synthetic: noise must be nonnegative");
    const std::size_t intrinsic = intrinsic_dim(spec.kind);
    if (spec.ambient_dim < intrinsic) {
        throw std::invalid_argument("gen_synthetic: ambient_dim below the intrinsic dimension");
    }
    const bool timeseries = spec.kind == SyntheticKind::two_clusters_timeseries;
    if (timeseries) {
        if (spec.step < 0 || spec.step > 9) throw std::invalid_argument("gen_synthetic: step must be 0..9");
    } else if (spec.step != 0) {
        throw std::invalid_argument("gen_synthetic: step applies only to two_clusters_timeseries");
    }

    Dataset out;
    out.name = kind_name(spec.kind);

    if (timeseries) {
        // Sampled directly in the ambient space; each step draws fresh points
        // from its own substream so slices are independent but reproducible.
        Rng rng = Rng(spec.seed).fork(1000 + static_cast<std::uint64_t>(spec.step));
        gen_timeseries(spec, rng, out.samples, out.labels);
        return out;
    }

    Rng rng(spec.seed);
    const Matrix map = ambient_map(spec.ambient_dim, intrinsic, Rng(spec.seed).fork(kTagMap));
    Matrix low;
    switch (spec.kind) {
        case SyntheticKind::moon:
            gen_moon(spec.n, spec.noise, rng, low);
            break;
        case SyntheticKind::two_circles:
            gen_two_circles(spec.n, spec.noise, rng, low, out.labels);
            break;
        case SyntheticKind::tangent_spheres:
            gen_tangent_spheres(spec.n, spec.noise, rng, low, out.labels);
            break;
        case SyntheticKind::cylinders:
            gen_cylinders(spec.n, spec.noise, rng, low, out.labels);
            break;
        case SyntheticKind::line:
            gen_line(spec.n, spec.noise, rng, low);
            break;
        case SyntheticKind::two_clusters_timeseries:
            break;  // handled above
    }
    out.samples = spec.ambient_dim == intrinsic ? std::move(low) : lift(low, map);
    return out;
}

void save_csv(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    for (std::size_t c = 0; c < d.dim(); ++c) {
        if (c) out << ',';
        out << 'f' << c;
    }
    if (d.has_labels()) out << ",label";
    out << '\n';
    char buf[40];
    for (std::size_t r = 0; r < d.n(); ++r) {
        const double* row = d.samples.row(r);
        for (std::size_t c = 0; c < d.dim(); ++c) {
            if (c) out << ',';
            std::snprintf(buf, sizeof buf, "%.17g", row[c]);
            out << buf;
        }
        if (d.has_labels()) out << ',' << d.labels[r];
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path);

    const std::vector<std::string> header = split_fields(line);
    const bool with_labels = !header.empty() && header.back() == "label";
    const std::size_t d = header.size() - (with_labels ? 1 : 0);
    if (d == 0) throw DataError(path + ": no feature columns");

    std::vector<double> values;
    std::vector<std::int32_t> labels;
    std::size_t rows = 0, lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw DataError(path + ": wrong field count at line " + std::to_string(lineno));
        }
        for (std::size_t c = 0; c < d; ++c) {
            std::size_t used = 0;
            double v;
            try {
                v = std::stod(fields[c], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != fields[c].size() || fields[c].empty() || !std::isfinite(v)) {
                throw DataError(path + ": bad value '" + fields[c] + "' at line " +
                                std::to_string(lineno) + ", column " + std::to_string(c + 1));
            }
            values.push_back(v);
        }
        if (with_labels) {
            const std::string& f = fields[d];
            std::size_t used = 0;
            long v = 0;
            try {
                v = std::stol(f, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != f.size() || f.empty()) {
                throw DataError(path + ": bad label '" + f + "' at line " + std::to_string(lineno));
            }
            labels.push_back(static_cast<std::int32_t>(v));
        }
        ++rows;
    }
    if (rows == 0) throw DataError(path + ": no data rows");

    Dataset out;
    out.samples.resize(rows, d);
    std::copy(values.begin(), values.end(), out.samples.data());
    out.labels = std::move(labels);
    // Name the dataset by the file stem.
    std::size_t start = path.find_last_of("/\\");
    start = start == std::string::npos ? 0 : start + 1;
    std::size_t end = path.rfind('.');
    if (end == std::string::npos || end < start) end = path.size();
    out.name = path.substr(start, end - start);
    return out;
}

SplitPair split(const Dataset& d, double train_frac, std::uint64_t seed) {
    const std::size_t n = d.n();
    const auto n_train = static_cast<std::size_t>(train_frac * static_cast<double>(n));
    if (n_train < 1 || n_train >= n) {
        throw std::invalid_argument("split: both sides must receive at least one row");
    }
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    // Keep original row order inside each side.
    std::sort(order.begin(), order.begin() + n_train);
    std::sort(order.begin() + n_train, order.end());

    SplitPair out;
    out.seed = seed;
    auto take = [&](std::size_t lo, std::size_t hi, const std::string& suffix) {
        Dataset sub;
        sub.samples.resize(hi - lo, d.dim());
        if (d.has_labels()) sub.labels.resize(hi - lo);
        for (std::size_t i = lo; i < hi; ++i) {
            const std::uint32_t src = order[i];
            std::copy(d.samples.row(src), d.samples.row(src) + d.dim(), sub.samples.row(i - lo));
            if (d.has_labels()) sub.labels[i - lo] = d.labels[src];
        }
        sub.name = d.name + suffix;
        return sub;
    };
    out.train = take(0, n_train, "-train");
    out.test = take(n_train, n, "-test");
    return out;
}

Dataset concat(const Dataset& a, const Dataset& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("concat: dimension mismatch");
    Dataset out;
    out.samples.resize(a.n() + b.n(), a.dim());
    std::copy(a.samples.data(), a.samples.data() + a.samples.size(), out.samples.data());
    std::copy(b.samples.data(), b.samples.data() + b.samples.size(),
              out.samples.data() + a.samples.size());
    if (a.has_labels() && b.has_labels()) {
        out.labels = a.labels;
        out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
    }
    out.name = a.name;
    return out;
}

}  // namespace sepspec
