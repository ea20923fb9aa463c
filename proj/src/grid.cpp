#include "finitype/grid.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

namespace finitype {

GridFunction::GridFunction(std::vector<int> shape_, Box box_, bool periodic_)
    : shape(std::move(shape_)), box(std::move(box_)), periodic(periodic_) {
    if (shape.empty() || static_cast<int>(box.lo.size()) != dims() || static_cast<int>(box.hi.size()) != dims()) {
        throw Error(ErrorKind::PreconditionFailed, "grid shape and box dimensions differ");
    }
    std::size_t total = 1;
    for (int i = 0; i < dims(); ++i) {
        if (shape[i] < 1 || !(box.hi[i] > box.lo[i])) throw Error(ErrorKind::PreconditionFailed, "empty grid axis");
        if (periodic && !std::has_single_bit(static_cast<unsigned>(shape[i]))) {
            throw Error(ErrorKind::PreconditionFailed, "periodic grids need power-of-two sides");
        }
        total *= static_cast<std::size_t>(shape[i]);
    }
    values.assign(total, 0.0);
}

double GridFunction::cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dims(); ++a) v *= spacing(a);
    return v;
}

std::vector<int> GridFunction::multi_index(std::size_t flat) const {
    std::vector<int> idx(shape.size());
    for (int a = dims() - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(flat % static_cast<std::size_t>(shape[a]));
        flat /= static_cast<std::size_t>(shape[a]);
    }
    return idx;
}

std::size_t GridFunction::flat_index(const std::vector<int>& idx) const {
    std::size_t flat = 0;
    for (int a = 0; a < dims(); ++a) flat = flat * static_cast<std::size_t>(shape[a]) + static_cast<std::size_t>(idx[a]);
    return flat;
}

Vec GridFunction::point(std::size_t flat) const {
    const auto idx = multi_index(flat);
    Vec x(shape.size());
    for (int a = 0; a < dims(); ++a) x[a] = box.lo[a] + idx[a] * spacing(a);
    return x;
}

double GridFunction::lp_norm(double p) const {
    if (std::isinf(p)) {
        double m = 0.0;
        for (const auto& v : values) m = std::max(m, std::abs(v));
        return m;
    }
    double s = 0.0;
    if (p == 2.0) {
        for (const auto& v : values) s += std::norm(v);
    } else if (p == 4.0) {
        for (const auto& v : values) s += std::norm(v) * std::norm(v);
    } else {
        for (const auto& v : values) s += std::pow(std::abs(v), p);
    }
    return std::pow(s * cell_volume(), 1.0 / p);
}

GridFunction periodic_grid(int dims, int n, double side) {
    Box box{Vec(static_cast<std::size_t>(dims), -0.5 * side), Vec(static_cast<std::size_t>(dims), 0.5 * side)};
    return GridFunction(std::vector<int>(static_cast<std::size_t>(dims), n), box, true);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

template <class T>
void put(std::vector<std::uint8_t>& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::uint8_t buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    out.insert(out.end(), buf, buf + sizeof(T));
}

template <class T>
T get(const std::vector<std::uint8_t>& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw Error(ErrorKind::ConfigInvalid, "truncated grid file");
    std::uint8_t buf[sizeof(T)];
    std::memcpy(buf, in.data() + pos, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    pos += sizeof(T);
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

constexpr char kMagic[8] = {'F', 'T', 'G', 'R', 'I', 'D', '0', '1'};

}  // namespace

std::vector<std::uint8_t> grid_to_binary(const GridFunction& g) {
    std::vector<std::uint8_t> out(kMagic, kMagic + 8);
    put<std::int64_t>(out, g.dims());
    for (int s : g.shape) put<std::int64_t>(out, s);
    for (double v : g.box.lo) put<double>(out, v);
    for (double v : g.box.hi) put<double>(out, v);
    put<std::uint8_t>(out, g.periodic ? 1 : 0);
    put<std::uint8_t>(out, g.complex_valued ? 1 : 0);
    for (const auto& v : g.values) {
        put<double>(out, v.real());
        if (g.complex_valued) put<double>(out, v.imag());
    }
    return out;
}

GridFunction grid_from_binary(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
        throw Error(ErrorKind::ConfigInvalid, "not a grid file");
    }
    std::size_t pos = 8;
    const auto dims = get<std::int64_t>(bytes, pos);
    if (dims < 1 || dims > 8) throw Error(ErrorKind::ConfigInvalid, "bad grid dimension");
    std::vector<int> shape;
    for (std::int64_t i = 0; i < dims; ++i) shape.push_back(static_cast<int>(get<std::int64_t>(bytes, pos)));
    Box box;
    for (std::int64_t i = 0; i < dims; ++i) box.lo.push_back(get<double>(bytes, pos));
    for (std::int64_t i = 0; i < dims; ++i) box.hi.push_back(get<double>(bytes, pos));
    const bool periodic = get<std::uint8_t>(bytes, pos) != 0;
    const bool cplx = get<std::uint8_t>(bytes, pos) != 0;
    GridFunction g(shape, box, periodic);
    g.complex_valued = cplx;
    for (auto& v : g.values) {
        const double re = get<double>(bytes, pos);
        const double im = cplx ? get<double>(bytes, pos) : 0.0;
        v = {re, im};
    }
    if (pos != bytes.size()) throw Error(ErrorKind::ConfigInvalid, "trailing bytes in grid file");
    return g;
}

std::string grid_to_csv(const GridFunction& g) {
    std::ostringstream os;
    os << std::setprecision(17);
    for (int a = 0; a < g.dims(); ++a) os << 'x' << a << ',';
    os << "re,im\n";
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (double x : g.point(i)) os << x << ',';
        os << g.values[i].real() << ',' << g.values[i].imag() << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// FFT

namespace {

struct PlanKey {
    std::vector<int> shape;
    int sign;
    bool operator<(const PlanKey& o) const { return std::tie(shape, sign) < std::tie(o.shape, o.sign); }
};

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_plan get_plan(const std::vector<int>& shape, int sign) {
    static std::map<PlanKey, fftw_plan> cache;
    std::lock_guard lock(planner_mutex());
    PlanKey key{shape, sign};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::size_t total = 1;
    for (int s : shape) total *= static_cast<std::size_t>(s);
    // Planning with ESTIMATE never touches the arrays, but FFTW wants real ones.
    fftw_complex* buf = fftw_alloc_complex(total);
    fftw_plan plan = fftw_plan_dft(static_cast<int>(shape.size()), shape.data(), buf, buf, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!plan) throw Error(ErrorKind::PreconditionFailed, "FFTW could not plan this transform");
    cache.emplace(key, plan);
    return plan;
}

void execute(std::vector<std::complex<double>>& data, const std::vector<int>& shape, int sign) {
    std::size_t total = 1;
    for (int s : shape) total *= static_cast<std::size_t>(s);
    if (data.size() != total) throw Error(ErrorKind::PreconditionFailed, "FFT data size does not match shape");
    fftw_plan plan = get_plan(shape, sign);
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
}

}  // namespace

void fft_forward(std::vector<std::complex<double>>& data, const std::vector<int>& shape) {
    execute(data, shape, FFTW_FORWARD);
}

void fft_inverse(std::vector<std::complex<double>>& data, const std::vector<int>& shape) {
    execute(data, shape, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(data.size());
    for (auto& v : data) v *= scale;
}

Vec lattice_frequency(const GridFunction& g, std::size_t flat) {
    const auto idx = g.multi_index(flat);
    Vec xi(idx.size());
    for (int a = 0; a < g.dims(); ++a) {
        const int n = g.shape[a];
        const int m = idx[a] < n / 2 ? idx[a] : idx[a] - n;
        xi[a] = 2.0 * std::numbers::pi * m / (g.box.hi[a] - g.box.lo[a]);
    }
    return xi;
}

double nyquist(const GridFunction& g) {
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < g.dims(); ++a) best = std::min(best, std::numbers::pi / g.spacing(a));
    return best;
}

InterpStencil interp_stencil(double frac, int order) {
    InterpStencil s;
    const double f = frac;
    if (order == 1) {
        s.first = 0;
        s.count = 2;
        s.w[0] = 1.0 - f;
        s.w[1] = f;
        return s;
    }
    s.first = -1;
    s.count = 4;
    s.w[0] = -f * (f - 1.0) * (f - 2.0) / 6.0;
    s.w[1] = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
    s.w[2] = -(f + 1.0) * f * (f - 2.0) / 2.0;
    s.w[3] = (f + 1.0) * f * (f - 1.0) / 6.0;
    return s;
}

std::complex<double> interpolate(const GridFunction& f, const Vec& x, int order, bool* zero_extended) {
    const int d = f.dims();
    std::vector<InterpStencil> st(static_cast<std::size_t>(d));
    std::vector<int> base(static_cast<std::size_t>(d)), idx(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
        const double pos = (x[a] - f.box.lo[a]) / f.spacing(a);
        const double fl = std::floor(pos);
        base[a] = static_cast<int>(fl);
        st[a] = interp_stencil(pos - fl, order);
    }
    const int count = st[0].count;
    int combos = 1;
    for (int a = 0; a < d; ++a) combos *= count;
    std::complex<double> acc = 0.0;
    for (int c = 0; c < combos; ++c) {
        int rem = c;
        double w = 1.0;
        bool inside = true;
        for (int a = 0; a < d; ++a) {
            const int s = rem % count;
            rem /= count;
            w *= st[a].w[s];
            int v = base[a] + st[a].first + s;
            const int n = f.shape[a];
            if (f.periodic) {
                v %= n;
                if (v < 0) v += n;
            } else if (v < 0 || v >= n) {
                inside = false;
            }
            idx[a] = v;
        }
        if (!inside) {
            if (zero_extended) *zero_extended = true;
            continue;
        }
        acc += w * f.values[f.flat_index(idx)];
    }
    return acc;
}

}  // namespace finitype
