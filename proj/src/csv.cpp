#include "vscsync/csv.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace vscsync {

std::string format_number(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_csv(std::ostream& os, std::span<const Sample> series)
{
    os << kCsvHeader << '\n';
    std::string line;
    for (const auto& s : series) {
        const double row[] = {s.t,        s.i_g(0),     s.i_g(1),     s.v(0),         s.v(1),
                              s.i(0),     s.i(1),       s.delta,      s.u1,           s.u(0),
                              s.u(1),     s.e_detector, s.xhat(0),    s.xhat(1),      s.theta(0),
                              s.theta(1), s.theta(2),   s.norm_F,     s.vg_hat,       s.omega_hat_hz,
                              s.pe_min_eig};
        line.clear();
        for (std::size_t k = 0; k < std::size(row); ++k) {
            if (k) {
                line += ',';
            }
            line += format_number(row[k]);
        }
        os << line << '\n';
    }
}

}  // namespace vscsync
