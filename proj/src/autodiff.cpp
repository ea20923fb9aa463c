#include "finitype/autodiff.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

namespace finitype {

namespace {

void enumerate(int vars, int degree, std::vector<int>& current, int pos, int remaining,
               std::vector<std::vector<int>>& out) {
    if (pos == vars - 1) {
        current[static_cast<std::size_t>(pos)] = remaining;
        out.push_back(current);
        return;
    }
    for (int a = remaining; a >= 0; --a) {
        current[static_cast<std::size_t>(pos)] = a;
        enumerate(vars, degree, current, pos + 1, remaining - a, out);
    }
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

MultiIndexSet::MultiIndexSet(int vars, int order) : vars_(vars), order_(order) {
    if (vars < 1 || order < 0) throw std::invalid_argument("MultiIndexSet: bad shape");
    std::vector<int> current(static_cast<std::size_t>(vars), 0);
    for (int d = 0; d <= order; ++d) {
        const std::size_t before = indices_.size();
        enumerate(vars, d, current, 0, d, indices_);
        degree_.insert(degree_.end(), indices_.size() - before, d);
    }
    std::map<std::vector<int>, std::uint32_t> lookup;
    for (std::size_t k = 0; k < indices_.size(); ++k) lookup[indices_[k]] = static_cast<std::uint32_t>(k);
    std::vector<int> sum(static_cast<std::size_t>(vars));
    for (std::size_t a = 0; a < indices_.size(); ++a) {
        for (std::size_t b = 0; b < indices_.size(); ++b) {
            if (degree_[a] + degree_[b] > order) continue;
            for (int i = 0; i < vars; ++i) sum[i] = indices_[a][i] + indices_[b][i];
            products_.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), lookup.at(sum)});
        }
    }
}

std::shared_ptr<const MultiIndexSet> MultiIndexSet::get(int vars, int order) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const MultiIndexSet>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{vars, order}];
    if (!slot) slot = std::make_shared<const MultiIndexSet>(vars, order);
    return slot;
}

int MultiIndexSet::find(const std::vector<int>& alpha) const {
    if (static_cast<int>(alpha.size()) != vars_) return -1;
    int deg = 0;
    for (int a : alpha) deg += a;
    if (deg > order_) return -1;
    for (std::size_t k = 0; k < indices_.size(); ++k) {
        if (indices_[k] == alpha) return static_cast<int>(k);
    }
    return -1;
}

Jet::Jet(double c) : constant_(c) {}

Jet::Jet(std::shared_ptr<const MultiIndexSet> set, double c)
    : set_(std::move(set)), coeffs_(set_->size(), 0.0) {
    coeffs_[0] = c;
}

Jet Jet::variable(std::shared_ptr<const MultiIndexSet> set, int i, double value) {
    Jet j(std::move(set), value);
    if (j.set_->order() >= 1) {
        std::vector<int> alpha(static_cast<std::size_t>(j.set_->vars()), 0);
        alpha[static_cast<std::size_t>(i)] = 1;
        j.coeffs_[static_cast<std::size_t>(j.set_->find(alpha))] = 1.0;
    }
    return j;
}

double Jet::derivative(const std::vector<int>& alpha) const {
    if (!set_) {
        for (int a : alpha) {
            if (a != 0) return 0.0;
        }
        return constant_;
    }
    const int k = set_->find(alpha);
    if (k < 0) throw std::out_of_range("Jet::derivative: order exceeds jet order");
    double scale = 1.0;
    for (int a : alpha) scale *= factorial(a);
    return coeffs_[static_cast<std::size_t>(k)] * scale;
}

void Jet::promote(const std::shared_ptr<const MultiIndexSet>& set) {
    if (set_) return;
    set_ = set;
    coeffs_.assign(set_->size(), 0.0);
    coeffs_[0] = constant_;
}

Jet& Jet::operator+=(const Jet& o) {
    if (!o.set_) {
        if (set_) coeffs_[0] += o.constant_;
        else constant_ += o.constant_;
        return *this;
    }
    promote(o.set_);
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
    return *this;
}

Jet& Jet::operator-=(const Jet& o) {
    if (!o.set_) {
        if (set_) coeffs_[0] -= o.constant_;
        else constant_ -= o.constant_;
        return *this;
    }
    promote(o.set_);
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
    return *this;
}

Jet& Jet::operator*=(const Jet& o) {
    if (!o.set_) {
        if (set_) {
            for (double& c : coeffs_) c *= o.constant_;
        } else {
            constant_ *= o.constant_;
        }
        return *this;
    }
    if (!set_) {
        const double c = constant_;
        *this = o;
        for (double& v : coeffs_) v *= c;
        return *this;
    }
    std::vector<double> out(coeffs_.size(), 0.0);
    for (const auto& p : set_->products()) out[p.sum] += coeffs_[p.a] * o.coeffs_[p.b];
    coeffs_ = std::move(out);
    return *this;
}

Jet operator-(const Jet& a) {
    Jet r = a;
    if (!r.set_) r.constant_ = -r.constant_;
    for (double& c : r.coeffs_) c = -c;
    return r;
}

Jet Jet::compose(const std::vector<double>& derivs) const {
    if (!set_) return Jet(derivs[0]);
    const int order = set_->order();
    Jet h = *this;
    h.coeffs_[0] = 0.0;
    // Horner in the nilpotent increment h.
    Jet r(set_, derivs[static_cast<std::size_t>(order)] / factorial(order));
    for (int m = order - 1; m >= 0; --m) {
        r *= h;
        r.coeffs_[0] += derivs[static_cast<std::size_t>(m)] / factorial(m);
    }
    return r;
}

namespace {

int jet_order(const Jet& x) { return x.is_constant() ? 0 : x.set()->order(); }

}  // namespace

Jet operator/(const Jet& a, const Jet& b) {
    if (b.is_constant()) {
        Jet r = a;
        return r * Jet(1.0 / b.value());
    }
    return a * pow(b, -1.0);
}

Jet pow(const Jet& x, double a) {
    const int order = jet_order(x);
    std::vector<double> d(static_cast<std::size_t>(order) + 1);
    const double x0 = x.value();
    double coef = 1.0;
    for (int m = 0; m <= order; ++m) {
        d[static_cast<std::size_t>(m)] = coef * std::pow(x0, a - m);
        coef *= (a - m);
    }
    return x.compose(d);
}

Jet sqrt(const Jet& x) { return pow(x, 0.5); }

Jet exp(const Jet& x) {
    const int order = jet_order(x);
    return x.compose(std::vector<double>(static_cast<std::size_t>(order) + 1, std::exp(x.value())));
}

Jet log(const Jet& x) {
    const int order = jet_order(x);
    std::vector<double> d(static_cast<std::size_t>(order) + 1);
    const double x0 = x.value();
    d[0] = std::log(x0);
    double f = 1.0;
    for (int m = 1; m <= order; ++m) {
        d[static_cast<std::size_t>(m)] = ((m % 2) ? 1.0 : -1.0) * f / std::pow(x0, m);
        f *= m;
    }
    return x.compose(d);
}

Jet sin(const Jet& x) {
    const int order = jet_order(x);
    const double s = std::sin(x.value()), c = std::cos(x.value());
    const double cycle[4] = {s, c, -s, -c};
    std::vector<double> d(static_cast<std::size_t>(order) + 1);
    for (int m = 0; m <= order; ++m) d[static_cast<std::size_t>(m)] = cycle[m % 4];
    return x.compose(d);
}

Jet cos(const Jet& x) {
    const int order = jet_order(x);
    const double s = std::sin(x.value()), c = std::cos(x.value());
    const double cycle[4] = {c, -s, -c, s};
    std::vector<double> d(static_cast<std::size_t>(order) + 1);
    for (int m = 0; m <= order; ++m) d[static_cast<std::size_t>(m)] = cycle[m % 4];
    return x.compose(d);
}

}  // namespace finitype
