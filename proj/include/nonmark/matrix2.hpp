#pragma once

#include <array>
#include <complex>

namespace nonmark {

using Complex = std::complex<double>;

/// Index of an observable in the (q, p) pair.
enum class Obs : int { q = 0, p = 1 };

/// 2x2 matrix indexed by observables.
template <class T>
struct Matrix2 {
  std::array<T, 4> m{};

  constexpr T& operator()(Obs i, Obs j) { return m[2 * static_cast<int>(i) + static_cast<int>(j)]; }
  constexpr const T& operator()(Obs i, Obs j) const {
    return m[2 * static_cast<int>(i) + static_cast<int>(j)];
  }

  constexpr T& qq() { return m[0]; }
  constexpr T& qp() { return m[1]; }
  constexpr T& pq() { return m[2]; }
  constexpr T& pp() { return m[3]; }
  constexpr const T& qq() const { return m[0]; }
  constexpr const T& qp() const { return m[1]; }
  constexpr const T& pq() const { return m[2]; }
  constexpr const T& pp() const { return m[3]; }

  static constexpr Matrix2 from(T qq, T qp, T pq, T pp) { return Matrix2{{qq, qp, pq, pp}}; }

  constexpr Matrix2& operator+=(const Matrix2& o) {
    for (int k = 0; k < 4; ++k) m[k] += o.m[k];
    return *this;
  }
  constexpr Matrix2& operator-=(const Matrix2& o) {
    for (int k = 0; k < 4; ++k) m[k] -= o.m[k];
    return *this;
  }
  constexpr Matrix2& operator*=(T s) {
    for (auto& x : m) x *= s;
    return *this;
  }
  friend constexpr Matrix2 operator+(Matrix2 a, const Matrix2& b) { return a += b; }
  friend constexpr Matrix2 operator-(Matrix2 a, const Matrix2& b) { return a -= b; }
  friend constexpr Matrix2 operator*(Matrix2 a, T s) { return a *= s; }
  friend constexpr Matrix2 operator*(T s, Matrix2 a) { return a *= s; }
  friend constexpr Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
    return from(a.m[0] * b.m[0] + a.m[1] * b.m[2], a.m[0] * b.m[1] + a.m[1] * b.m[3],
                a.m[2] * b.m[0] + a.m[3] * b.m[2], a.m[2] * b.m[1] + a.m[3] * b.m[3]);
  }
  friend constexpr bool operator==(const Matrix2&, const Matrix2&) = default;
};

using ComplexMatrix2 = Matrix2<Complex>;
using RealMatrix2 = Matrix2<double>;

inline ComplexMatrix2 to_complex(const RealMatrix2& r) {
  return ComplexMatrix2::from(r.qq(), r.qp(), r.pq(), r.pp());
}

inline ComplexMatrix2 adjoint(const ComplexMatrix2& a) {
  return ComplexMatrix2::from(std::conj(a.qq()), std::conj(a.pq()), std::conj(a.qp()), std::conj(a.pp()));
}

inline ComplexMatrix2 conj(const ComplexMatrix2& a) {
  return ComplexMatrix2::from(std::conj(a.qq()), std::conj(a.qp()), std::conj(a.pq()), std::conj(a.pp()));
}

/// Right limit of the (q, p) response at t = 0+: (chi_plus)_pq = 1 = -(chi_plus)_qp.
constexpr RealMatrix2 chi_plus() { return RealMatrix2::from(0.0, -1.0, 1.0, 0.0); }
constexpr RealMatrix2 chi_plus_inverse() { return RealMatrix2::from(0.0, 1.0, -1.0, 0.0); }

}  // namespace nonmark
