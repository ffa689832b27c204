#include "certledger/estimator.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace certledger {

namespace {

void require_positive(double v, const char* name, bool zero_ok = false)
{
    if (!std::isfinite(v) || v < 0 || (v == 0 && !zero_ok))
        throw std::invalid_argument(std::string(name) + (zero_ok ? " must be non-negative" : " must be positive"));
}

std::uint64_t blocks_in(double days, double block_time)
{
    return static_cast<std::uint64_t>(std::floor(days * 86400.0 / block_time));
}

template <class... A>
std::string fmt(const char* f, A... args)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

}  // namespace

CapacityReport estimate_capacity(const CapacityParams& p)
{
    require_positive(p.num_tls_domains, "num_tls_domains", true);
    require_positive(p.cert_size_bytes, "cert_size_bytes");
    require_positive(p.avg_cert_lifetime_days, "avg_cert_lifetime_days");
    require_positive(p.block_time_seconds, "block_time_seconds");
    require_positive(p.header_size_bytes, "header_size_bytes");
    require_positive(p.horizon_days, "horizon_days");
    if (p.price_per_gb)
        require_positive(*p.price_per_gb, "price_per_gb", true);

    CapacityReport r;
    r.params = p;
    r.live_certificate_bytes = p.num_tls_domains * p.cert_size_bytes;
    r.full_node_bytes_per_year = r.live_certificate_bytes * 365.0 / p.avg_cert_lifetime_days;
    r.full_node_bytes_per_horizon = r.full_node_bytes_per_year * p.horizon_days / 365.0;
    r.blocks_per_year = blocks_in(365, p.block_time_seconds);
    r.blocks_per_horizon = blocks_in(p.horizon_days, p.block_time_seconds);
    r.header_bytes_per_year = static_cast<double>(static_cast<unsigned long long>(r.blocks_per_year)) * p.header_size_bytes;
    r.header_bytes_per_horizon = static_cast<double>(static_cast<unsigned long long>(r.blocks_per_horizon)) * p.header_size_bytes;
    if (p.price_per_gb)
        r.cost_estimate = r.full_node_bytes_per_horizon / bytes_per_gb * *p.price_per_gb;
    return r;
}

std::string capacity_report_text(const CapacityReport& r)
{
    const auto& p = r.params;
    std::string s;
    s += fmt("inputs: %g domains, %g B certificates, %g-day lifetime, %g s blocks, "
                     "%g B headers, %g-day horizon\n",
                     p.num_tls_domains, p.cert_size_bytes, p.avg_cert_lifetime_days, p.block_time_seconds,
                     p.header_size_bytes, p.horizon_days);
    s += fmt("full node, new certificates per year:   %.0f B (%.2f GB)\n", r.full_node_bytes_per_year,
                     r.full_node_bytes_per_year / bytes_per_gb);
    s += fmt("full node, accumulated over horizon:    %.0f B (%.2f GB)\n", r.full_node_bytes_per_horizon,
                     r.full_node_bytes_per_horizon / bytes_per_gb);
    s += fmt("full node, live certificate set:        %.0f B (%.2f GB)\n", r.live_certificate_bytes,
                     r.live_certificate_bytes / bytes_per_gb);
    s += fmt("light client headers per year:          %.0f B (%.2f MB, %llu blocks)\n",
                     r.header_bytes_per_year, r.header_bytes_per_year / bytes_per_mb, static_cast<unsigned long long>(r.blocks_per_year));
    s += fmt("light client headers over horizon:      %.0f B (%.2f MB, %llu blocks)\n",
                     r.header_bytes_per_horizon, r.header_bytes_per_horizon / bytes_per_mb, static_cast<unsigned long long>(r.blocks_per_horizon));
    if (r.cost_estimate)
        s += fmt("full node disk cost over horizon:       $%.2f at $%g/GB\n", *r.cost_estimate,
                         *p.price_per_gb);
    return s;
}

std::string capacity_report_json(const CapacityReport& r)
{
    nlohmann::ordered_json j;
    const auto& p = r.params;
    j["params"] = {{"num_tls_domains", p.num_tls_domains},
                   {"cert_size_bytes", p.cert_size_bytes},
                   {"avg_cert_lifetime_days", p.avg_cert_lifetime_days},
                   {"block_time_seconds", p.block_time_seconds},
                   {"header_size_bytes", p.header_size_bytes},
                   {"horizon_days", p.horizon_days},
                   {"price_per_gb", p.price_per_gb ? nlohmann::ordered_json(*p.price_per_gb) : nullptr}};
    j["full_node_bytes_per_year"] = r.full_node_bytes_per_year;
    j["full_node_bytes_per_horizon"] = r.full_node_bytes_per_horizon;
    j["live_certificate_bytes"] = r.live_certificate_bytes;
    j["blocks_per_year"] = r.blocks_per_year;
    j["blocks_per_horizon"] = r.blocks_per_horizon;
    j["header_bytes_per_year"] = r.header_bytes_per_year;
    j["header_bytes_per_horizon"] = r.header_bytes_per_horizon;
    j["cost_estimate"] = r.cost_estimate ? nlohmann::ordered_json(*r.cost_estimate) : nullptr;
    return j.dump(2) + "\n";
}

}  // namespace certledger
