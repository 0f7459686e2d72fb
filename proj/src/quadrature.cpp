#include "uld/quadrature.hpp"

#include <array>
#include <cmath>

#include "uld/errors.hpp"

namespace uld {
namespace {

struct SimpsonPanel {
  double a, b, fa, fm, fb, whole;
};

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_rec(const std::function<double(double)>& f, const SimpsonPanel& p, double tol,
                   int depth) {
  const double m = 0.5 * (p.a + p.b);
  const double lm = 0.5 * (p.a + m), rm = 0.5 * (m + p.b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(p.a, m, p.fa, flm, p.fm);
  const double right = simpson(m, p.b, p.fm, frm, p.fb);
  const double delta = left + right - p.whole;
  if (std::abs(delta) <= 15.0 * tol || depth >= 60) {
    if (depth >= 60 && std::abs(delta) > 15.0 * tol)
      throw NumericalError("adaptive_simpson: depth cap reached before tolerance");
    return left + right + delta / 15.0;
  }
  const SimpsonPanel lp{p.a, m, p.fa, flm, p.fm, left};
  const SimpsonPanel rp{m, p.b, p.fm, frm, p.fb, right};
  return simpson_rec(f, lp, tol / 2.0, depth + 1) + simpson_rec(f, rp, tol / 2.0, depth + 1);
}

// 32-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; symmetric).
constexpr std::array<double, 16> kGlNodes = {
    0.0483076656877383162348126, 0.1444719615827964934851864, 0.2392873622521370745446032,
    0.3318686022821276497799168, 0.4213512761306353453641194, 0.5068999089322293900237475,
    0.5877157572407623290407455, 0.6630442669302152009751152, 0.7321821187402896803874267,
    0.7944837959679424069630973, 0.8493676137325699701336930, 0.8963211557660521239653072,
    0.9349060759377396891709191, 0.9647622555875064307738119, 0.9856115115452683354001750,
    0.9972638618494815635449811};
constexpr std::array<double, 16> kGlWeights = {
    0.0965400885147278005667648, 0.0956387200792748594190820, 0.0938443990808045656391802,
    0.0911738786957638847128686, 0.0876520930044038111427715, 0.0833119242269467552221991,
    0.0781938957870703064717409, 0.0723457941088485062253994, 0.0658222227763618468376501,
    0.0586840934785355471452836, 0.0509980592623761761961632, 0.0428358980222266806568786,
    0.0342738629130214331026877, 0.0253920653092620594557526, 0.0162743947309056706051706,
    0.0070186100094700966004071};

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double abs_tol,
                        double rel_tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = simpson(a, b, fa, fm, fb);
  const double tol = std::max(abs_tol, rel_tol * std::abs(whole));
  return simpson_rec(f, SimpsonPanel{a, b, fa, fm, fb, whole}, tol, 0);
}

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels) {
  double total = 0.0;
  const double w = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * w;
    const double c = lo + 0.5 * w, half = 0.5 * w;
    double s = 0.0;
    for (int i = 0; i < 16; ++i)
      s += kGlWeights[i] * (f(c - half * kGlNodes[i]) + f(c + half * kGlNodes[i]));
    total += s * half;
  }
  return total;
}

}  // namespace uld
