#pragma once

#include <ostream>

namespace certledger {

/*
 * The `certledger` command line. Exit codes:
 *
 *   0  success (verify: Accept; run-scenario: every assertion held)
 *   1  a negative verdict: verify rejected the bundle, or a scenario assertion failed
 *   2  usage error
 *   3  unreadable or malformed input (files, JSON, encodings, scenario config)
 *   4  the ledger refused the request (transaction rejected or skipped, bad chain)
 *
 * Failures print one line to `err`: "error: <category>: <message>".
 */
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace certledger
