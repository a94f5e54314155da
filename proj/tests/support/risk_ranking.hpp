#pragma once

// The 25 rows of a reference binary risk ranking: occurrences,
// interactions, displayed impact, CVE count, likelihood (%) and risk.

#include <array>
#include <cstddef>
#include <string_view>

namespace firmgraph::testing {

struct ReferenceRiskRow {
    std::string_view binary;
    std::size_t occurrences;
    std::size_t interactions;
    double impact;
    std::size_t cves;
    double likelihood;
    long risk;
};

inline constexpr std::array<ReferenceRiskRow, 25> reference_risk_rows{{
    {"cups", 4, 22, 5.5, 18, 94.1, 518},
    {"lighttpd", 87, 368, 4.2, 21, 96.9, 410},
    {"openssl", 147, 452, 3, 58, 100, 307},
    {"php", 49, 135, 2.8, 45, 100, 276},
    {"mongoose", 8, 108, 13.5, 9, 18, 244},
    {"wget", 98, 145, 1.5, 8, 95.8, 142},
    {"tcpdump", 36, 49, 1.4, 166, 95, 129},
    {"dnsmasq", 238, 617, 2.6, 14, 46.2, 120},
    {"telnet", 24, 30, 1.3, 2, 92.6, 116},
    {"nginx", 54, 64, 1.2, 8, 95.8, 114},
    {"mysql", 19, 22, 1.2, 19, 97.3, 113},
    {"tftp_hpa", 18, 223, 12.4, 1, 8.6, 106},
    {"memcached", 19, 22, 1.2, 3, 88.3, 102},
    {"ntp", 5, 5, 1, 7, 96.6, 97},
    {"squid", 1, 1, 1, 49, 96.7, 97},
    {"samba", 3, 3, 1, 5, 94.9, 95},
    {"vsftpd", 55, 55, 1, 1, 87.2, 87},
    {"rpcbind", 13, 21, 1.6, 1, 53, 86},
    {"ffmpeg", 24, 32, 1.3, 39, 60.4, 80},
    {"file", 19, 233, 12.3, 3, 6, 74},
    {"curl", 49, 263, 5.4, 49, 13, 70},
    {"asterisk", 3, 1, 0.3, 30, 96, 32},
    {"pg", 30, 195, 6.5, 1, 4.6, 30},
    {"traceroute", 4, 11, 2.8, 1, 11, 30},
    {"dhcpcd", 39, 123, 3.2, 7, 8.7, 27},
}};

}  // namespace firmgraph::testing
