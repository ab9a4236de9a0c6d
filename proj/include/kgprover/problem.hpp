#pragma once

#include <optional>
#include <string>

namespace kgp {

/// One benchmark item: informal statement plus the Lean skeleton around it.
struct Problem {
    std::string name;
    std::string informal_statement;
    std::string header;
    std::string informal_prefix;
    std::string formal_statement;
    std::optional<std::string> goal;
    std::string split;
    std::string extra_json = "{}";  // unrecognised dataset fields, kept verbatim

    bool operator==(const Problem&) const = default;
};

}  // namespace kgp
