#ifndef GIBBS_CONFIG_HPP
#define GIBBS_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gibbs/conditional.hpp"
#include "gibbs/family.hpp"
#include "gibbs/tv.hpp"

namespace gibbs {

/// Block-size rule: k = fixed, k = ceil(sqrt(n)) or k = ceil(n^alpha), 0 < alpha < 1.
struct KRule {
    enum class Kind { Fixed, Sqrt, Power };
    Kind kind = Kind::Sqrt;
    std::size_t fixed = 1;
    double alpha = 0.5;

    [[nodiscard]] std::size_t apply(std::size_t n) const;
    [[nodiscard]] std::string to_string() const;
    static KRule parse(std::string_view text);

    friend bool operator==(const KRule&, const KRule&) = default;
};

struct ExperimentConfig {
    /// Member pattern; sequences of length n cycle through it.
    std::vector<FamilyMember> pattern;
    std::vector<std::size_t> n_values;
    KRule k_rule;
    std::vector<Vec> a_values;
    TVMethod method = TVMethod::ScheffeQuadrature;
    RatioMethod ratio = RatioMethod::Exact;
    std::size_t samples = 1'000'000;
    std::uint64_t seed = 0;
    std::string output = "results";

    /// Throws ConfigError on any inconsistency (k-rule, k >= n, dimensions).
    void validate() const;

    friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);
};

/// Sequence X_1..X_n cycling through the pattern, indices 1..n.
std::vector<FamilyMember> make_members(std::span<const FamilyMember> pattern, std::size_t n);

/// Parses `{gamma, shape=3, scale=1}` or `{normal, mean=0 0, cov=1 0 0 1}`.
FamilyMember parse_member(std::string_view text);
std::string serialize_member(const FamilyMember& m);

/// Parses `linspace(lo, hi, count)` or a comma-separated list of numbers.
std::vector<double> parse_number_list(std::string_view text);
/// Space-separated vector components.
Vec parse_vector(std::string_view text);

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);

/// Shortest-round-trip-safe decimal rendering (17 significant digits).
std::string format_double(double v);
/// Components joined with ';'.
std::string format_vector(const Vec& v);

} // namespace gibbs

#endif
