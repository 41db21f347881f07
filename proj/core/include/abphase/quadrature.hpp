#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature.
//
// Error control is relative to the L1 norm of the integrand rather than to
// the value of the integral, so integrals that cancel to zero (several of the
// field overlaps in this library vanish identically) still terminate.
// Integrands may return a scalar, a Vec2, or a nested Estimate; nested
// estimates propagate their L1 norm and error as densities so an outer
// integral sees the absolute size of the full multidimensional integrand.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "abphase/vec.hpp"

namespace abphase::quad {

struct Tolerance {
  double rel = 1e-6;         ///< target error, relative to the integrand L1 norm
  double abs = 0.0;          ///< absolute floor of the target
  double accept_rel = 1e-4;  ///< callers reject results whose error exceeds this
  double cutoff = 1e-9;      ///< radius excised around point-charge singularities
  std::size_t max_panels = 4000;

  /// Tolerance handed to inner integrals of a nested integral.
  Tolerance inner() const {
    Tolerance t = *this;
    t.rel *= 0.1;
    t.abs *= 0.1;
    return t;
  }
};

template <class V>
struct Estimate {
  V value{};
  double error = 0.0;
  double l1 = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;

  bool acceptable(const Tolerance& tol) const {
    return error <= std::max(tol.abs, tol.accept_rel * l1);
  }
};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const Vec2& v) { return norm(v); }

namespace detail {

template <class T>
struct is_estimate : std::false_type {};
template <class V>
struct is_estimate<Estimate<V>> : std::true_type {};

template <class R>
struct value_of {
  using type = R;
};
template <class V>
struct value_of<Estimate<V>> {
  using type = V;
};

template <class V>
struct Sample {
  V value{};
  double l1 = 0.0;
  double error = 0.0;
  std::size_t evaluations = 1;
};

template <class R>
auto to_sample(const R& r) {
  using V = typename value_of<R>::type;
  if constexpr (is_estimate<R>::value) {
    return Sample<V>{r.value, r.l1, r.error, r.evaluations};
  } else {
    return Sample<V>{r, magnitude(r), 0.0, 1};
  }
}

/// GK15 nodes on [-1, 1] with the embedded G7 weights (zero at Kronrod-only
/// nodes). Built once from the Boost.Math tables.
struct Rule {
  std::array<double, 15> nodes{};
  std::array<double, 15> kronrod{};
  std::array<double, 15> gauss{};

  static const Rule& get() {
    static const Rule rule = [] {
      using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
      using G = boost::math::quadrature::gauss<double, 7>;
      Rule r;
      const auto& xk = GK::abscissa();
      const auto& wk = GK::weights();
      const auto& xg = G::abscissa();
      const auto& wg = G::weights();
      auto gauss_weight = [&](double x) {
        for (std::size_t j = 0; j < xg.size(); ++j) {
          if (std::abs(xg[j] - x) < 1e-14) return wg[j];
        }
        return 0.0;
      };
      std::size_t n = 0;
      for (std::size_t i = 0; i < xk.size(); ++i) {
        const double w = gauss_weight(xk[i]);
        r.nodes[n] = xk[i];
        r.kronrod[n] = wk[i];
        r.gauss[n] = w;
        ++n;
        if (xk[i] != 0.0) {
          r.nodes[n] = -xk[i];
          r.kronrod[n] = wk[i];
          r.gauss[n] = w;
          ++n;
        }
      }
      return r;
    }();
    return rule;
  }
};

enum class PieceKind { finite, upper_infinite, lower_infinite };

/// One integration piece, expressed in a local variable t. Infinite pieces
/// are mapped onto t in [0, 1).
struct Piece {
  PieceKind kind = PieceKind::finite;
  double anchor_lo = 0.0;
  double anchor_hi = 0.0;

  double t_begin() const { return kind == PieceKind::finite ? anchor_lo : 0.0; }
  double t_end() const { return kind == PieceKind::finite ? anchor_hi : 1.0; }

  template <class F>
  auto eval(F& f, double t) const {
    switch (kind) {
      case PieceKind::upper_infinite: {
        const double s = 1.0 - t;
        auto smp = to_sample(f(anchor_lo + t / s));
        const double jac = 1.0 / (s * s);
        smp.value = smp.value * jac;
        smp.l1 *= jac;
        smp.error *= jac;
        return smp;
      }
      case PieceKind::lower_infinite: {
        const double s = 1.0 - t;
        auto smp = to_sample(f(anchor_hi - t / s));
        const double jac = 1.0 / (s * s);
        smp.value = smp.value * jac;
        smp.l1 *= jac;
        smp.error *= jac;
        return smp;
      }
      case PieceKind::finite:
      default:
        return to_sample(f(t));
    }
  }
};

template <class V>
struct Panel {
  std::size_t piece = 0;
  double t0 = 0.0;
  double t1 = 0.0;
  V value{};
  double rule_error = 0.0;
  double inner_error = 0.0;
  double l1 = 0.0;
};

template <class V, class F>
Panel<V> apply_rule(F& f, const Piece& piece, std::size_t index, double t0,
                    double t1, std::size_t& evaluations) {
  const Rule& rule = Rule::get();
  const double mid = 0.5 * (t0 + t1);
  const double half = 0.5 * (t1 - t0);
  V k{};
  V g{};
  double l1 = 0.0;
  double inner = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const auto smp = piece.eval(f, mid + half * rule.nodes[i]);
    k += smp.value * rule.kronrod[i];
    if (rule.gauss[i] != 0.0) g += smp.value * rule.gauss[i];
    l1 += rule.kronrod[i] * smp.l1;
    inner += rule.kronrod[i] * smp.error;
    evaluations += smp.evaluations;
  }
  Panel<V> p;
  p.piece = index;
  p.t0 = t0;
  p.t1 = t1;
  p.value = k * half;
  p.rule_error = half * magnitude(k - g);
  p.inner_error = half * inner;
  p.l1 = half * l1;
  return p;
}

inline std::vector<Piece> make_pieces(std::span<const double> points) {
  std::vector<Piece> pieces;
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double a = points[i];
    const double b = points[i + 1];
    if (!(a < b)) continue;
    if (a == -inf && b == inf) {
      pieces.push_back({PieceKind::lower_infinite, 0.0, 0.0});
      pieces.push_back({PieceKind::upper_infinite, 0.0, 0.0});
    } else if (a == -inf) {
      pieces.push_back({PieceKind::lower_infinite, b, b});
    } else if (b == inf) {
      pieces.push_back({PieceKind::upper_infinite, a, a});
    } else {
      pieces.push_back({PieceKind::finite, a, b});
    }
  }
  return pieces;
}

}  // namespace detail

/// Integrates f over the consecutive intervals [points[i], points[i+1]].
/// The outermost points may be infinite; interior points act as breakpoints
/// (place them on kinks and near-singularities).
template <class F>
auto integrate(F&& f, std::span<const double> points, const Tolerance& tol) {
  using R = std::invoke_result_t<F&, double>;
  using V = typename detail::value_of<R>::type;
  using Panel = detail::Panel<V>;

  const auto pieces = detail::make_pieces(points);
  Estimate<V> out;
  if (pieces.empty()) return out;

  std::size_t evaluations = 0;
  std::vector<Panel> heap;
  heap.reserve(64);
  auto worse = [](const Panel& a, const Panel& b) {
    return a.rule_error < b.rule_error;
  };

  double rule_err = 0.0;
  double inner_err = 0.0;
  double l1 = 0.0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    heap.push_back(detail::apply_rule<V>(f, pieces[i], i, pieces[i].t_begin(),
                                         pieces[i].t_end(), evaluations));
    rule_err += heap.back().rule_error;
    inner_err += heap.back().inner_error;
    l1 += heap.back().l1;
  }
  std::make_heap(heap.begin(), heap.end(), worse);

  bool exhausted = false;
  while (heap.size() < tol.max_panels) {
    const double target = std::max(tol.abs, tol.rel * l1);
    if (rule_err + inner_err <= target) break;
    // Bisection cannot reduce the error of inner integrals; stop once the
    // outer rule error is a small part of what is left.
    if (rule_err <= std::max(target - inner_err, 0.25 * target)) break;

    std::pop_heap(heap.begin(), heap.end(), worse);
    const Panel worst = heap.back();
    const double mid = 0.5 * (worst.t0 + worst.t1);
    if (!(mid > worst.t0 && mid < worst.t1) ||
        (worst.t1 - worst.t0) <= 64.0 * std::numeric_limits<double>::epsilon() *
                                     (1.0 + std::abs(mid))) {
      std::push_heap(heap.begin(), heap.end(), worse);
      exhausted = true;
      break;
    }
    heap.pop_back();
    const auto& piece = pieces[worst.piece];
    Panel left = detail::apply_rule<V>(f, piece, worst.piece, worst.t0, mid, evaluations);
    Panel right = detail::apply_rule<V>(f, piece, worst.piece, mid, worst.t1, evaluations);
    rule_err += left.rule_error + right.rule_error - worst.rule_error;
    inner_err += left.inner_error + right.inner_error - worst.inner_error;
    l1 += left.l1 + right.l1 - worst.l1;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), worse);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), worse);
  }

  // Deterministic final summation in domain order.
  std::sort(heap.begin(), heap.end(), [](const Panel& a, const Panel& b) {
    return a.piece != b.piece ? a.piece < b.piece : a.t0 < b.t0;
  });
  V value{};
  double error = 0.0;
  double norm1 = 0.0;
  for (const auto& p : heap) {
    value += p.value;
    error += p.rule_error + p.inner_error;
    norm1 += p.l1;
  }
  // Rounding floor: summing many panels cannot beat a few ulps of the L1 norm.
  error += 8.0 * std::numeric_limits<double>::epsilon() * norm1;

  out.value = value;
  out.error = error;
  out.l1 = norm1;
  out.evaluations = evaluations;
  out.converged = !exhausted && error <= std::max(tol.abs, tol.rel * norm1) * 1.0000001 +
                                             8.0 * std::numeric_limits<double>::epsilon() * norm1;
  return out;
}

template <class F>
auto integrate(F&& f, double a, double b, const Tolerance& tol) {
  const std::array<double, 2> points{a, b};
  return integrate(std::forward<F>(f), std::span<const double>(points), tol);
}

template <class F>
auto integrate(F&& f, std::initializer_list<double> points, const Tolerance& tol) {
  const std::vector<double> pts(points);
  return integrate(std::forward<F>(f), std::span<const double>(pts), tol);
}

}  // namespace abphase::quad
