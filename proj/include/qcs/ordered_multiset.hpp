#pragma once

// Streaming empirical distribution: an AVL tree over distinct values where each
// node carries its multiplicity and the total count of its subtree. Nodes live
// in a vector so copies are plain value copies.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <type_traits>
#include <utility>
#include <vector>

#include "qcs/errors.hpp"
#include "qcs/extended.hpp"

namespace qcs {

struct CdfValue {
  double fminus;  // #{X < x} / t
  double f;       // #{X <= x} / t
};

namespace detail {

// t * p, snapped to the nearest integer when within rounding error of it, so
// that levels such as k / t index the intended order statistic.
inline double scaled_level(std::int64_t t, double p) {
  const double tp = static_cast<double>(t) * p;
  const double r = std::nearbyint(tp);
  if (std::fabs(tp - r) <= 1e-12 * std::max(1.0, std::fabs(tp))) return r;
  return tp;
}

}  // namespace detail

template <class T, class Compare = std::less<T>>
class OrderedMultiset {
 public:
  using value_type = T;

  OrderedMultiset() = default;
  explicit OrderedMultiset(Compare cmp) : cmp_(std::move(cmp)) {}

  std::int64_t size() const { return total(root_); }
  bool empty() const { return root_ < 0; }
  std::size_t distinct() const { return nodes_.size(); }

  std::int64_t insert(const T& x) {
    if constexpr (std::is_floating_point_v<T>) {
      if (std::isnan(x)) throw DomainError("cannot insert NaN");
    }
    root_ = insert_at(root_, x);
    return size();
  }

  // #{X < x}
  std::int64_t count_less(const T& x) const {
    std::int64_t acc = 0;
    for (int n = root_; n >= 0;) {
      const Node& node = nodes_[n];
      if (cmp_(node.value, x)) {
        acc += total(node.left) + node.mult;
        n = node.right;
      } else {
        n = node.left;
      }
    }
    return acc;
  }

  // #{X <= x}
  std::int64_t count_less_equal(const T& x) const {
    std::int64_t acc = 0;
    for (int n = root_; n >= 0;) {
      const Node& node = nodes_[n];
      if (cmp_(x, node.value)) {
        n = node.left;
      } else {
        acc += total(node.left) + node.mult;
        n = node.right;
      }
    }
    return acc;
  }

  CdfValue cdf_at(const T& x) const {
    require_nonempty();
    const double t = static_cast<double>(size());
    return {count_less(x) / t, count_less_equal(x) / t};
  }

  CdfValue cdf_at(const Extended<T>& x) const {
    require_nonempty();
    if (x.is_neg_inf()) return {0.0, 0.0};
    if (x.is_pos_inf()) return {1.0, 1.0};
    return cdf_at(x.value());
  }

  // k-th smallest (1-based); sentinels outside [1, t].
  Extended<T> order_stat(std::int64_t k) const {
    if (k < 1) return Extended<T>::neg_inf();
    if (k > size()) return Extended<T>::pos_inf();
    int n = root_;
    while (true) {
      const Node& node = nodes_[n];
      const std::int64_t left = total(node.left);
      if (k <= left) {
        n = node.left;
      } else if (k <= left + node.mult) {
        return node.value;
      } else {
        k -= left + node.mult;
        n = node.right;
      }
    }
  }

  // Q(p): the floor(t p) + 1 order statistic.
  Extended<T> upper_quantile(double p) const {
    if (std::isnan(p)) throw DomainError("quantile level is NaN");
    const double f = std::floor(detail::scaled_level(size(), p));
    if (f < 0.0) return Extended<T>::neg_inf();
    if (f >= static_cast<double>(size())) return Extended<T>::pos_inf();
    return order_stat(static_cast<std::int64_t>(f) + 1);
  }

  // Q^-(p): the ceil(t p) order statistic.
  Extended<T> lower_quantile(double p) const {
    if (std::isnan(p)) throw DomainError("quantile level is NaN");
    const double c = std::ceil(detail::scaled_level(size(), p));
    if (c < 1.0) return Extended<T>::neg_inf();
    if (c > static_cast<double>(size())) return Extended<T>::pos_inf();
    return order_stat(static_cast<std::int64_t>(c));
  }

  // Visits (value, multiplicity) in increasing order.
  template <class F>
  void for_each(F&& f) const {
    visit(root_, f);
  }

  // Visits distinct values v with lo <= v <= hi in increasing order.
  template <class F>
  void for_each_in(const Extended<T>& lo, const Extended<T>& hi, F&& f) const {
    visit_range(root_, lo, hi, f);
  }

  std::vector<T> sorted_values() const {
    std::vector<T> out;
    out.reserve(static_cast<std::size_t>(size()));
    for_each([&](const T& v, std::int64_t m) { out.insert(out.end(), static_cast<std::size_t>(m), v); });
    return out;
  }

  // Structural check used by tests: AVL balance, counts, ordering.
  bool check_invariants() const {
    bool ok = true;
    check(root_, nullptr, nullptr, ok);
    return ok;
  }

 private:
  struct Node {
    T value;
    int left = -1;
    int right = -1;
    int height = 1;
    std::int64_t mult = 1;
    std::int64_t total = 1;
  };

  void require_nonempty() const {
    if (empty()) throw QueryError("query on an empty sample");
  }

  std::int64_t total(int n) const { return n < 0 ? 0 : nodes_[n].total; }
  int height(int n) const { return n < 0 ? 0 : nodes_[n].height; }

  void update(int n) {
    Node& node = nodes_[n];
    node.height = 1 + std::max(height(node.left), height(node.right));
    node.total = node.mult + total(node.left) + total(node.right);
  }

  int rotate_right(int n) {
    const int l = nodes_[n].left;
    nodes_[n].left = nodes_[l].right;
    nodes_[l].right = n;
    update(n);
    update(l);
    return l;
  }

  int rotate_left(int n) {
    const int r = nodes_[n].right;
    nodes_[n].right = nodes_[r].left;
    nodes_[r].left = n;
    update(n);
    update(r);
    return r;
  }

  int rebalance(int n) {
    update(n);
    const int bal = height(nodes_[n].left) - height(nodes_[n].right);
    if (bal > 1) {
      const int l = nodes_[n].left;
      if (height(nodes_[l].left) < height(nodes_[l].right)) nodes_[n].left = rotate_left(l);
      return rotate_right(n);
    }
    if (bal < -1) {
      const int r = nodes_[n].right;
      if (height(nodes_[r].right) < height(nodes_[r].left)) nodes_[n].right = rotate_right(r);
      return rotate_left(n);
    }
    return n;
  }

  int insert_at(int n, const T& x) {
    if (n < 0) {
      nodes_.push_back(Node{x});
      return static_cast<int>(nodes_.size()) - 1;
    }
    if (cmp_(x, nodes_[n].value)) {
      const int child = insert_at(nodes_[n].left, x);
      nodes_[n].left = child;
    } else if (cmp_(nodes_[n].value, x)) {
      const int child = insert_at(nodes_[n].right, x);
      nodes_[n].right = child;
    } else {
      ++nodes_[n].mult;
      ++nodes_[n].total;
      return n;
    }
    return rebalance(n);
  }

  template <class F>
  void visit(int n, F& f) const {
    if (n < 0) return;
    visit(nodes_[n].left, f);
    f(nodes_[n].value, nodes_[n].mult);
    visit(nodes_[n].right, f);
  }

  template <class F>
  void visit_range(int n, const Extended<T>& lo, const Extended<T>& hi, F& f) const {
    if (n < 0) return;
    const Extended<T> v(nodes_[n].value);
    const bool above_lo = !(v < lo);
    const bool below_hi = !(hi < v);
    if (above_lo) visit_range(nodes_[n].left, lo, hi, f);
    if (above_lo && below_hi) f(nodes_[n].value, nodes_[n].mult);
    if (below_hi) visit_range(nodes_[n].right, lo, hi, f);
  }

  int check(int n, const T* lo, const T* hi, bool& ok) const {
    if (n < 0) return 0;
    const Node& node = nodes_[n];
    if (lo && !cmp_(*lo, node.value)) ok = false;
    if (hi && !cmp_(node.value, *hi)) ok = false;
    const int hl = check(node.left, lo, &node.value, ok);
    const int hr = check(node.right, &node.value, hi, ok);
    if (std::abs(hl - hr) > 1 || node.height != 1 + std::max(hl, hr)) ok = false;
    if (node.mult < 1 || node.total != node.mult + total(node.left) + total(node.right)) ok = false;
    return node.height;
  }

  std::vector<Node> nodes_;
  int root_ = -1;
  Compare cmp_{};
};

}  // namespace qcs
