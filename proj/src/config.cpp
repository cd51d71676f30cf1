#include "liquidex/config.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <string>

namespace liquidex {

namespace {

std::string trim(const std::string& text) {
    std::size_t begin = 0, end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    return text.substr(begin, end - begin);
}

std::vector<std::string> split(const std::string& text, char delim) {
    std::vector<std::string> out;
    if (trim(text).empty()) return out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(delim, start);
        out.push_back(trim(text.substr(start, pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

bool parse_double(const std::string& text, double& out) {
    if (text.empty()) return false;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (errno != 0 || end != text.c_str() + text.size() || !std::isfinite(v)) return false;
    out = v;
    return true;
}

bool parse_long(const std::string& text, long& out) {
    if (text.empty()) return false;
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(text.c_str(), &end, 10);
    if (errno != 0 || end != text.c_str() + text.size()) return false;
    out = v;
    return true;
}

bool parse_u64(const std::string& text, std::uint64_t& out) {
    if (text.empty() || text[0] == '-') return false;
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
    if (errno != 0 || end != text.c_str() + text.size()) return false;
    out = v;
    return true;
}

// Strict key-value reader: keys are consumed as the schema walks the file,
// and whatever is left at the end is unknown (or inapplicable to the chosen
// families, which is the same offense under strict parsing).
class Reader {
public:
    Reader(const std::string& text, IssueList& issues) : issues_(&issues) {
        int lineNo = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const std::size_t eol = text.find('\n', pos);
            std::string line = text.substr(pos, eol == std::string::npos ? eol : eol - pos);
            ++lineNo;
            pos = (eol == std::string::npos) ? text.size() + 1 : eol + 1;

            const std::size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;

            const std::size_t eq = line.find('=');
            if (eq == std::string::npos || line.find('.') == std::string::npos ||
                line.find('.') > eq) {
                add("MalformedLine", "line " + std::to_string(lineNo) +
                                        ": expected 'section.key = value'");
                continue;
            }
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) {
                add("MalformedLine", "line " + std::to_string(lineNo) + ": empty key");
                continue;
            }
            if (kv_.count(key)) {
                add("DuplicateKey", key + " appears more than once");
                continue;
            }
            kv_[key] = value;
        }
    }

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    // Typed accessors: `require_*` report MissingKey, `take_*` fall back to
    // the given default. All report BadValue on malformed text.
    std::string require_string(const std::string& key) {
        if (!consume(key)) {
            add("MissingKey", key);
            return {};
        }
        return kv_[key];
    }

    double require_double(const std::string& key) {
        if (!consume(key)) {
            add("MissingKey", key);
            return 0.0;
        }
        double v = 0.0;
        if (!parse_double(kv_[key], v)) bad(key, "a number");
        return v;
    }

    int require_int(const std::string& key) {
        if (!consume(key)) {
            add("MissingKey", key);
            return 0;
        }
        long v = 0;
        if (!parse_long(kv_[key], v)) bad(key, "an integer");
        return static_cast<int>(v);
    }

    std::vector<double> require_list(const std::string& key) {
        if (!consume(key)) {
            add("MissingKey", key);
            return {};
        }
        return parse_list(key, kv_[key]);
    }

    double take_double(const std::string& key, double fallback) {
        if (!consume(key)) return fallback;
        double v = fallback;
        if (!parse_double(kv_[key], v)) bad(key, "a number");
        return v;
    }

    int take_int(const std::string& key, int fallback) {
        if (!consume(key)) return fallback;
        long v = fallback;
        if (!parse_long(kv_[key], v)) bad(key, "an integer");
        return static_cast<int>(v);
    }

    long take_long(const std::string& key, long fallback) {
        if (!consume(key)) return fallback;
        long v = fallback;
        if (!parse_long(kv_[key], v)) bad(key, "an integer");
        return v;
    }

    std::uint64_t take_u64(const std::string& key, std::uint64_t fallback) {
        if (!consume(key)) return fallback;
        std::uint64_t v = fallback;
        if (!parse_u64(kv_[key], v)) bad(key, "an unsigned integer");
        return v;
    }

    std::string take_string(const std::string& key, const std::string& fallback) {
        if (!consume(key)) return fallback;
        return kv_[key];
    }

    // "auto" or a typed value; `isAuto` reports which branch was taken.
    int take_int_or_auto(const std::string& key, bool& present) {
        present = consume(key);
        if (!present) return 0;
        if (kv_[key] == "auto") return 0;
        long v = 0;
        if (!parse_long(kv_[key], v)) bad(key, "an integer or \"auto\"");
        return static_cast<int>(v);
    }

    double take_double_or_auto(const std::string& key) {
        if (!consume(key)) return 0.0;
        if (kv_[key] == "auto") return 0.0;
        double v = 0.0;
        if (!parse_double(kv_[key], v)) bad(key, "a number or \"auto\"");
        return v;
    }

    std::vector<double> parse_list(const std::string& key, const std::string& value) {
        std::vector<double> out;
        for (const std::string& piece : split(value, ',')) {
            double v = 0.0;
            if (!parse_double(piece, v)) {
                bad(key, "a comma-separated number list");
                return {};
            }
            out.push_back(v);
        }
        return out;
    }

    std::string raw(const std::string& key) { return kv_[key]; }
    bool consume(const std::string& key) {
        if (!kv_.count(key)) return false;
        taken_.insert(key);
        return true;
    }

    // Everything not consumed by the schema walk is an unknown key.
    void finish() {
        for (const auto& [key, value] : kv_) {
            if (!taken_.count(key)) add("UnknownKey", key);
        }
    }

    void add(const std::string& code, const std::string& detail) {
        issues_->push_back({code, detail});
    }

private:
    void bad(const std::string& key, const std::string& expected) {
        add("BadValue", key + ": expected " + expected + ", got '" + kv_[key] + "'");
    }

    std::map<std::string, std::string> kv_;
    std::set<std::string> taken_;
    IssueList* issues_;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_list(const std::vector<double>& values) {
    std::string out;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k) out += ", ";
        out += fmt(values[k]);
    }
    return out;
}

}  // namespace

Validated<RunConfig> parse_config(const std::string& text) {
    IssueList issues;
    Reader reader(text, issues);

    // ---- [model] ----
    const int regimes = reader.require_int("model.regimes");
    const std::vector<double> mu = reader.require_list("model.mu");
    const std::vector<double> sigma = reader.require_list("model.sigma");
    const std::vector<double> generatorFlat = reader.require_list("model.generator");
    const double lambda = reader.require_double("model.lambda");

    // ---- [impact] ----
    ImpactConfig impact;
    impact.phi = reader.require_string("impact.phi");
    if (impact.phi == "exponential") {
        impact.alpha = reader.require_double("impact.alpha");
    } else if (impact.phi == "tabulated") {
        impact.phiRates = reader.require_list("impact.phi_rates");
        impact.phiValues = reader.require_list("impact.phi_values");
    } else if (!impact.phi.empty() && impact.phi != "linear") {
        reader.add("BadValue", "impact.phi: expected linear, exponential or tabulated, got '" +
                                   impact.phi + "'");
    }
    impact.g = reader.require_string("impact.g");
    if (impact.g == "piecewise") {
        impact.gBreakpoints = reader.require_list("impact.g_breakpoints");
        const std::string branches = reader.require_string("impact.g_coefficients");
        for (const std::string& branch : split(branches, ';')) {
            impact.gCoefficients.push_back(
                reader.parse_list("impact.g_coefficients", branch));
        }
    } else if (!impact.g.empty() && impact.g != "identity" && impact.g != "builtin") {
        reader.add("BadValue",
                   "impact.g: expected identity, builtin or piecewise, got '" + impact.g + "'");
    }

    // ---- [problem] ----
    const double beta = reader.require_double("problem.beta");
    const double horizonT = reader.require_double("problem.t");
    const double upsilonMax = reader.require_double("problem.upsilon_max");
    const double quantum = reader.require_double("problem.control_quantum");
    const double xMax = reader.require_double("problem.x_max");
    const double sMin = reader.require_double("problem.s_min");
    const double sMax = reader.require_double("problem.s_max");

    // ---- [grid] (full defaults) ----
    GridConfig grid;
    grid.nX = reader.take_int("grid.n_x", grid.nX);
    grid.nZ = reader.take_int("grid.n_z", grid.nZ);
    bool nTauPresent = false;
    grid.nTau = reader.take_int_or_auto("grid.n_tau", nTauPresent);
    const std::string scheme = reader.take_string("grid.scheme", "upwind");
    if (scheme == "upwind") {
        grid.scheme = Scheme::UpwindX;
    } else if (scheme == "central") {
        grid.scheme = Scheme::CentralX;
    } else {
        reader.add("BadValue", "grid.scheme: expected upwind or central, got '" + scheme + "'");
    }
    if (grid.nX < 2) reader.add("InvalidCounts", "grid.n_x must be at least 2");
    if (grid.nZ < 2) reader.add("InvalidCounts", "grid.n_z must be at least 2");
    if (nTauPresent && grid.nTau != 0 && grid.nTau < 2) {
        reader.add("InvalidCounts", "grid.n_tau must be at least 2 or \"auto\"");
    }

    // ---- [simulate] (full defaults) ----
    SimulateConfig simulate;
    simulate.nPaths = reader.take_long("simulate.n_paths", simulate.nPaths);
    simulate.dt = reader.take_double_or_auto("simulate.dt");
    simulate.seed = reader.take_u64("simulate.seed", simulate.seed);
    const bool x0Given = reader.has("simulate.x0");
    simulate.x0 = reader.take_double("simulate.x0", 0.5 * xMax);
    const bool s0Given = reader.has("simulate.s0");
    simulate.s0 = reader.take_double("simulate.s0", std::sqrt(sMin * sMax));
    simulate.regime0 = reader.take_int("simulate.regime0", 1);
    if (simulate.nPaths < 2) reader.add("InvalidCounts", "simulate.n_paths must be at least 2");
    if (simulate.dt < 0.0) reader.add("InvalidDt", "simulate.dt must be positive or \"auto\"");
    if (x0Given && simulate.x0 < 0.0) {
        reader.add("NegativeShares", "simulate.x0 must be nonnegative");
    }
    if (s0Given && simulate.s0 <= 0.0) {
        reader.add("NonPositivePrice", "simulate.s0 must be positive");
    }
    if (regimes >= 1 && (simulate.regime0 < 1 || simulate.regime0 > regimes)) {
        reader.add("RegimeOutOfRange", "simulate.regime0 must be in 1.." +
                                           std::to_string(regimes));
    }

    // ---- [output] (no defaults: runs must say where artifacts go) ----
    OutputConfig output;
    output.directory = reader.require_string("output.directory");
    output.slices = reader.require_list("output.slices");
    for (double t : output.slices) {
        if (t < 0.0 || t > horizonT) {
            reader.add("SliceOutOfRange",
                       "output.slices: t = " + fmt(t) + " is outside [0, T]");
        }
    }

    reader.finish();

    // ---- build the validated pieces ----
    Validated<GeneratorMatrix> gen = make_invalid<GeneratorMatrix>({});
    if (regimes < 1) {
        issues.push_back({"InvalidCounts", "model.regimes must be at least 1"});
    } else if (generatorFlat.size() != static_cast<std::size_t>(regimes) * regimes) {
        issues.push_back({"GeneratorShape",
                          "model.generator needs regimes^2 = " +
                              std::to_string(regimes * regimes) + " entries, got " +
                              std::to_string(generatorFlat.size())});
    } else {
        std::vector<std::vector<double>> rows(regimes);
        for (int i = 0; i < regimes; ++i) {
            rows[i].assign(generatorFlat.begin() + static_cast<std::ptrdiff_t>(i) * regimes,
                           generatorFlat.begin() + static_cast<std::ptrdiff_t>(i + 1) * regimes);
        }
        gen = validate_generator(rows);
        issues.insert(issues.end(), gen.issues.begin(), gen.issues.end());
    }

    ImpactSpec impactSpec;
    if (impact.phi == "exponential") {
        if (impact.alpha > 0.0) {
            impactSpec.phi = TemporaryImpact::exponential_saturating(impact.alpha);
        } else {
            issues.push_back({"AlphaNonPositive", "impact.alpha must be positive"});
        }
    } else if (impact.phi == "tabulated") {
        auto tabulated = TemporaryImpact::tabulated_concave(impact.phiRates, impact.phiValues);
        issues.insert(issues.end(), tabulated.issues.begin(), tabulated.issues.end());
        if (tabulated.ok()) impactSpec.phi = tabulated.get();
    }
    if (impact.g == "builtin") {
        impactSpec.g = BlockImpact::builtin_concave();
    } else if (impact.g == "piecewise") {
        auto piecewise =
            BlockImpact::piecewise_polynomial(impact.gBreakpoints, impact.gCoefficients);
        issues.insert(issues.end(), piecewise.issues.begin(), piecewise.issues.end());
        if (piecewise.ok()) impactSpec.g = piecewise.get();
    }

    if (!issues.empty() || !gen.ok()) return make_invalid<RunConfig>(issues);

    ProblemSpec problem{beta,     horizonT,
                        upsilonMax, quantum,
                        {mu, sigma, lambda},
                        gen.get(),
                        impactSpec,
                        {xMax, sMin, sMax}};
    Validated<ProblemSpec> checked = validate_problem(problem);
    if (!checked.ok()) return make_invalid<RunConfig>(checked.issues);

    RunConfig config{checked.get(), impact, grid, simulate, output};
    return make_valid(std::move(config));
}

std::string echo_config(const RunConfig& config) {
    const ProblemSpec& p = config.problem;
    std::string out;
    out += "# resolved configuration: every default made explicit\n";
    out += "model.regimes = " + std::to_string(p.regimes()) + "\n";
    out += "model.mu = " + fmt_list(p.model.mu) + "\n";
    out += "model.sigma = " + fmt_list(p.model.sigma) + "\n";
    out += "model.generator = " + fmt_list(p.generator.flat()) + "\n";
    out += "model.lambda = " + fmt(p.model.lambda) + "\n";
    out += "impact.phi = " + config.impact.phi + "\n";
    if (config.impact.phi == "exponential") {
        out += "impact.alpha = " + fmt(config.impact.alpha) + "\n";
    } else if (config.impact.phi == "tabulated") {
        out += "impact.phi_rates = " + fmt_list(config.impact.phiRates) + "\n";
        out += "impact.phi_values = " + fmt_list(config.impact.phiValues) + "\n";
    }
    out += "impact.g = " + config.impact.g + "\n";
    if (config.impact.g == "piecewise") {
        out += "impact.g_breakpoints = " + fmt_list(config.impact.gBreakpoints) + "\n";
        std::string branches;
        for (std::size_t k = 0; k < config.impact.gCoefficients.size(); ++k) {
            if (k) branches += "; ";
            branches += fmt_list(config.impact.gCoefficients[k]);
        }
        out += "impact.g_coefficients = " + branches + "\n";
    }
    out += "problem.beta = " + fmt(p.beta) + "\n";
    out += "problem.t = " + fmt(p.horizonT) + "\n";
    out += "problem.upsilon_max = " + fmt(p.upsilonMax) + "\n";
    out += "problem.control_quantum = " + fmt(p.controlQuantum) + "\n";
    out += "problem.x_max = " + fmt(p.domain.xMax) + "\n";
    out += "problem.s_min = " + fmt(p.domain.sMin) + "\n";
    out += "problem.s_max = " + fmt(p.domain.sMax) + "\n";
    out += "grid.n_x = " + std::to_string(config.grid.nX) + "\n";
    out += "grid.n_z = " + std::to_string(config.grid.nZ) + "\n";
    out += std::string("grid.n_tau = ") +
           (config.grid.nTau == 0 ? "auto" : std::to_string(config.grid.nTau)) + "\n";
    out += std::string("grid.scheme = ") +
           (config.grid.scheme == Scheme::UpwindX ? "upwind" : "central") + "\n";
    out += "simulate.n_paths = " + std::to_string(config.simulate.nPaths) + "\n";
    out += std::string("simulate.dt = ") +
           (config.simulate.dt == 0.0 ? "auto" : fmt(config.simulate.dt)) + "\n";
    out += "simulate.seed = " + std::to_string(config.simulate.seed) + "\n";
    out += "simulate.x0 = " + fmt(config.simulate.x0) + "\n";
    out += "simulate.s0 = " + fmt(config.simulate.s0) + "\n";
    out += "simulate.regime0 = " + std::to_string(config.simulate.regime0) + "\n";
    out += "output.directory = " + config.output.directory + "\n";
    out += "output.slices = " + fmt_list(config.output.slices) + "\n";
    return out;
}

GridSpec make_grid(const RunConfig& config) {
    if (config.grid.nTau == 0) {
        return build_grid_auto_tau(config.problem, config.grid.nX, config.grid.nZ,
                                   config.grid.scheme);
    }
    return build_grid(config.problem, config.grid.nTau, config.grid.nX, config.grid.nZ);
}

double resolve_dt(const RunConfig& config, const GridSpec& grid) {
    return config.simulate.dt > 0.0 ? config.simulate.dt : grid.dTau / 4.0;
}

}  // namespace liquidex
