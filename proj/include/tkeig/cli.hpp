#pragma once

#include "tkeig/solver.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace tkeig {

// Subcommands: stats, solve, bench, verify, convert, generate. Returns the
// process exit code; diagnostics go to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// .mtx is read as Matrix Market, anything else as TKEV.
CsrMatrix load_matrix(const std::filesystem::path& path);

// The JSON document written by `solve`.
std::string result_json(const EigenResult& r, std::size_t workers, bool with_vectors = false);

} // namespace tkeig
