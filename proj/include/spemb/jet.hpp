#pragma once

// Truncated Taylor series arithmetic. A jet of order k stores
// c[i] = f^(i)(x0) / i! for i = 0..k.

#include <array>
#include <cmath>

namespace spemb {

class Jet {
 public:
  static constexpr int kMaxOrder = 8;

  Jet() = default;
  explicit Jet(int order, double value = 0.0) : order_(clamp(order)) { c_[0] = value; }

  static Jet variable(int order, double x) {
    Jet j(order, x);
    if (j.order_ > 0) j.c_[1] = 1.0;
    return j;
  }

  int order() const noexcept { return order_; }
  double value() const noexcept { return c_[0]; }
  double coeff(int i) const noexcept { return c_[i]; }
  double& coeff(int i) noexcept { return c_[i]; }

  // i-th derivative at the expansion point.
  double derivative(int i) const noexcept {
    double f = 1.0;
    for (int k = 2; k <= i; ++k) f *= k;
    return c_[i] * f;
  }

  Jet& operator+=(const Jet& o) {
    order_ = order_ < o.order_ ? order_ : o.order_;
    for (int i = 0; i <= order_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    order_ = order_ < o.order_ ? order_ : o.order_;
    for (int i = 0; i <= order_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Jet& operator+=(double v) { c_[0] += v; return *this; }
  Jet& operator-=(double v) { c_[0] -= v; return *this; }
  Jet& operator*=(double v) {
    for (int i = 0; i <= order_; ++i) c_[i] *= v;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double v) { return a += v; }
  friend Jet operator+(double v, Jet a) { return a += v; }
  friend Jet operator-(Jet a, double v) { return a -= v; }
  friend Jet operator-(double v, const Jet& a) { Jet r = -a; return r += v; }
  friend Jet operator*(Jet a, double v) { return a *= v; }
  friend Jet operator*(double v, Jet a) { return a *= v; }
  friend Jet operator/(Jet a, double v) { return a *= 1.0 / v; }
  friend Jet operator-(const Jet& a) {
    Jet r = a;
    for (int i = 0; i <= r.order_; ++i) r.c_[i] = -r.c_[i];
    return r;
  }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r(a.order_ < b.order_ ? a.order_ : b.order_);
    for (int k = 0; k <= r.order_; ++k) {
      double s = 0.0;
      for (int i = 0; i <= k; ++i) s += a.c_[i] * b.c_[k - i];
      r.c_[k] = s;
    }
    return r;
  }

  friend Jet operator/(const Jet& a, const Jet& b) {
    Jet q(a.order_ < b.order_ ? a.order_ : b.order_);
    for (int k = 0; k <= q.order_; ++k) {
      double s = a.c_[k];
      for (int i = 1; i <= k; ++i) s -= b.c_[i] * q.c_[k - i];
      q.c_[k] = s / b.c_[0];
    }
    return q;
  }

  friend Jet exp(const Jet& a) {
    Jet e(a.order_);
    e.c_[0] = std::exp(a.c_[0]);
    for (int k = 1; k <= a.order_; ++k) {
      double s = 0.0;
      for (int i = 1; i <= k; ++i) s += i * a.c_[i] * e.c_[k - i];
      e.c_[k] = s / k;
    }
    return e;
  }

  friend Jet log(const Jet& a) {
    Jet l(a.order_);
    l.c_[0] = std::log(a.c_[0]);
    for (int k = 1; k <= a.order_; ++k) {
      double s = 0.0;
      for (int i = 1; i < k; ++i) s += i * l.c_[i] * a.c_[k - i];
      l.c_[k] = (a.c_[k] - s / k) / a.c_[0];
    }
    return l;
  }

  friend Jet pow(const Jet& a, double r) {
    Jet p(a.order_);
    p.c_[0] = std::pow(a.c_[0], r);
    for (int k = 1; k <= a.order_; ++k) {
      double s = 0.0;
      for (int i = 1; i <= k; ++i) s += ((r + 1.0) * i - k) * a.c_[i] * p.c_[k - i];
      p.c_[k] = s / (k * a.c_[0]);
    }
    return p;
  }

  friend Jet ipow(const Jet& a, int n) {
    Jet r(a.order_, 1.0);
    for (int i = 0; i < n; ++i) r = r * a;
    return r;
  }

 private:
  static int clamp(int order) { return order < 0 ? 0 : (order > kMaxOrder ? kMaxOrder : order); }

  std::array<double, kMaxOrder + 1> c_{};
  int order_ = 0;
};

}  // namespace spemb
