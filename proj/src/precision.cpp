#include "tkeig/precision.hpp"

#include "tkeig/error.hpp"

#include <cctype>

namespace tkeig {

namespace {

char letter(Precision p) { return p == Precision::Single ? 'f' : 'd'; }

Precision from_letter(char c, std::string_view name)
{
    switch (std::tolower(static_cast<unsigned char>(c))) {
    case 'f':
        return Precision::Single;
    case 'd':
        return Precision::Double;
    default:
        throw InvalidConfigError("unknown precision configuration '" + std::string(name) +
                                 "' (expected three letters from {f, d}, e.g. fdf)");
    }
}

} // namespace

std::string PrecisionConfig::name() const
{
    return {letter(storage), letter(accumulate), letter(jacobi)};
}

PrecisionConfig PrecisionConfig::parse(std::string_view name)
{
    if (name.size() != 3) {
        throw InvalidConfigError("unknown precision configuration '" + std::string(name) +
                                 "' (expected three letters from {f, d}, e.g. fdf)");
    }
    return {from_letter(name[0], name), from_letter(name[1], name), from_letter(name[2], name)};
}

} // namespace tkeig
