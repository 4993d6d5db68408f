#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "vscsync/metrics.hpp"

namespace vscsync {

/// Column order of the exported time series.
inline constexpr const char* kCsvHeader =
    "t,i_g_d,i_g_q,v_d,v_q,i_d,i_q,delta,u1,u2,u3,e_detector,xhat_1,xhat_2,theta1,theta2,theta3,"
    "normF,Vg_hat,omega_hat_hz,pe_min_eig";

/// Shortest round-trip-safe 17-significant-digit decimal.
std::string format_number(double v);

void write_csv(std::ostream& os, std::span<const Sample> series);

}  // namespace vscsync
