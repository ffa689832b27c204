#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace certledger {

// Decimal units throughout: 1 GB = 1e9 bytes, 1 MB = 1e6 bytes.
inline constexpr double bytes_per_gb = 1e9;
inline constexpr double bytes_per_mb = 1e6;

struct CapacityParams {
    double num_tls_domains = 1.65e8;
    double cert_size_bytes = 512;
    double avg_cert_lifetime_days = 365;
    double block_time_seconds = 600;
    double header_size_bytes = 80;
    double horizon_days = 730;
    std::optional<double> price_per_gb = 0.02;  // USD
};

/*
 *   full_node_bytes_per_year    = domains * cert_size * 365 / lifetime_days
 *   full_node_bytes_per_horizon = full_node_bytes_per_year * horizon_days / 365
 *   live_certificate_bytes      = domains * cert_size
 *   blocks_per_year             = floor(365 * 86400 / block_time)
 *   blocks_per_horizon          = floor(horizon_days * 86400 / block_time)
 *   header_bytes_per_{year,horizon} = blocks * header_size
 *   cost_estimate               = full_node_bytes_per_horizon / 1e9 * price_per_gb
 *
 * The per-horizon figure is what a node accumulates, since the ledger keeps
 * expired and revoked certificates. The live figure is the steady-state
 * set of unexpired certificates.
 */
struct CapacityReport {
    CapacityParams params;
    double full_node_bytes_per_year = 0;
    double full_node_bytes_per_horizon = 0;
    double live_certificate_bytes = 0;
    std::uint64_t blocks_per_year = 0;
    std::uint64_t blocks_per_horizon = 0;
    double header_bytes_per_year = 0;
    double header_bytes_per_horizon = 0;
    std::optional<double> cost_estimate;
};

/// Throws std::invalid_argument unless every parameter is finite and
/// strictly positive. The domain count may also be zero.
CapacityReport estimate_capacity(const CapacityParams& params);

std::string capacity_report_text(const CapacityReport& r);
std::string capacity_report_json(const CapacityReport& r);

}  // namespace certledger
