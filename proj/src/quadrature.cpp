#include "emcel/quadrature.hpp"

namespace emcel::quad {

namespace {

// Points for 0 <= lo < hi.
void positive_split(double lo, double hi, std::vector<double>& out) {
    out.push_back(lo);
    double s = std::max(lo, 1.0);
    if (hi > 4.0 * s) {
        if (s > lo) out.push_back(s);
        for (double p = 2.0 * s; p < hi; p *= 2.0) out.push_back(p);
    }
}

}  // namespace

std::vector<double> wide_split_points(double a, double b) {
    std::vector<double> pts;
    if (a >= 0.0) {
        positive_split(a, b, pts);
        pts.push_back(b);
        return pts;
    }
    if (b <= 0.0) {
        positive_split(-b, -a, pts);
        pts.push_back(-a);
        std::vector<double> neg(pts.rbegin(), pts.rend());
        for (double& p : neg) p = -p;
        return neg;
    }
    // a < 0 < b
    std::vector<double> left;
    positive_split(0.0, -a, left);
    left.push_back(-a);
    for (auto it = left.rbegin(); it != left.rend(); ++it) pts.push_back(-*it);
    std::vector<double> right;
    positive_split(0.0, b, right);
    right.push_back(b);
    pts.insert(pts.end(), right.begin() + 1, right.end());
    return pts;
}

}  // namespace emcel::quad
