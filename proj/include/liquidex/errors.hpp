#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace liquidex {

// Runtime failure with a stable machine-readable code ("NegativeRate",
// "StabilityRefused", ...) next to the human-readable message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// One validation finding. Validation collects all findings instead of
// stopping at the first, so a config file reports every bad key at once.
struct Issue {
    std::string code;    // e.g. "RowSumNonzero"
    std::string detail;  // e.g. "row 0 sums to -0.1"
};

using IssueList = std::vector<Issue>;

// Value-or-issues result used by the validating constructors.
template <typename T>
struct Validated {
    std::vector<T> value;  // empty on failure, one element on success
    IssueList issues;

    bool ok() const noexcept { return issues.empty() && !value.empty(); }
    const T& get() const { return value.front(); }
};

template <typename T>
Validated<T> make_valid(T v) {
    Validated<T> r;
    r.value.push_back(std::move(v));
    return r;
}

template <typename T>
Validated<T> make_invalid(IssueList issues) {
    Validated<T> r;
    r.issues = std::move(issues);
    return r;
}

inline std::string join_issues(const IssueList& issues) {
    std::string out;
    for (const auto& it : issues) {
        if (!out.empty()) out += "; ";
        out += it.code;
        if (!it.detail.empty()) {
            out += ": ";
            out += it.detail;
        }
    }
    return out;
}

}  // namespace liquidex
