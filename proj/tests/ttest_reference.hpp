#pragma once

#include <array>

// Paired samples with t and one-tailed p frozen from scipy.stats.ttest_rel(alternative="greater").
namespace fixture::ttest_ref {

inline constexpr std::array<double, 30> a1{0.6251, 0.8972, 0.7757, 0.2252, 0.3002, 0.8736, 0.0053, 0.8212, 0.7971, 0.4679, 0.303, 0.2784, 0.2549, 0.4451, 0.5045, 0.5535, 0.9955, 0.7927, 0.6222, 0.989, 0.2153, 0.1602, 0.6125, 0.0439, 0.0357, 0.5149, 0.4662, 0.9172, 0.6292, 0.5141};
inline constexpr std::array<double, 30> b1{0.3456, 0.7755, 0.5789, 0.0539, 0.4093, 0.7025, 0.0, 0.9039, 0.6596, 0.4011, 0.2696, 0.238, 0.0211, 0.4065, 0.6583, 0.2714, 1.0, 0.7606, 0.476, 1.0, 0.2796, 0.0, 0.5737, 0.0804, 0.0, 0.5673, 0.4062, 0.9673, 0.795, 0.3628};
inline constexpr double t1 = 2.5462532182921365;
inline constexpr double p1 = 0.008230244723927261;

inline constexpr std::array<double, 30> a2{0.638, 0.6765, 0.1508, 0.4403, 0.2396, 0.4025, 0.0967, 0.9678, 0.215, 0.6718, 0.3004, 0.8741, 0.6622, 0.1316, 0.8451, 0.9449, 0.9039, 0.5697, 0.1455, 0.1925, 0.9279, 0.5523, 0.1806, 0.8841, 0.6416, 0.5697, 0.3763, 0.411, 0.2395, 0.0381};
inline constexpr std::array<double, 30> b2{0.8762, 0.4677, 0.5476, 0.3222, 0.7513, 0.0252, 0.3722, 0.0304, 0.1229, 0.9671, 0.6578, 0.4282, 0.5237, 0.8728, 0.3442, 0.5903, 0.6837, 0.3554, 0.5191, 0.7652, 0.9092, 0.1511, 0.9334, 0.0052, 0.753, 0.8105, 0.1368, 0.4189, 0.8153, 0.0143};
inline constexpr double t2 = -0.11757338948535644;
inline constexpr double p2 = 0.5463918808231005;

}  // namespace fixture::ttest_ref
