#include "gibbs/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "gibbs/error.hpp"

namespace gibbs {

namespace {

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

double parse_double(std::string_view text)
{
    const std::string s(trim(text));
    if (s.empty())
        throw ConfigError("expected a number, got an empty string");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v))
        throw ConfigError("not a finite number: '" + s + "'");
    return v;
}

std::size_t parse_count(std::string_view text)
{
    const std::string s(trim(text));
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError("expected a non-negative integer, got '" + s + "'");
    return static_cast<std::size_t>(std::stoull(s));
}

std::string lowercase(std::string_view s)
{
    std::string out(s);
    for (auto& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

} // namespace

std::string format_double(double v)
{
    return fmt::format("{:.17g}", v);
}

std::string format_vector(const Vec& v)
{
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i > 0)
            out += ';';
        out += format_double(v(i));
    }
    return out;
}

std::size_t KRule::apply(std::size_t n) const
{
    switch (kind) {
    case Kind::Fixed: return fixed;
    case Kind::Sqrt: {
        auto k = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
        while (k * k < n)
            ++k;
        while (k > 0 && (k - 1) * (k - 1) >= n)
            --k;
        return k;
    }
    case Kind::Power: {
        const double x = std::pow(static_cast<double>(n), alpha);
        const double nearest = std::round(x);
        if (std::abs(x - nearest) <= 1e-9 * x)
            return static_cast<std::size_t>(nearest);
        return static_cast<std::size_t>(std::ceil(x));
    }
    }
    return fixed;
}

std::string KRule::to_string() const
{
    switch (kind) {
    case Kind::Fixed: return "fixed(" + std::to_string(fixed) + ")";
    case Kind::Sqrt: return "sqrt";
    case Kind::Power: return "power(" + format_double(alpha) + ")";
    }
    return "sqrt";
}

KRule KRule::parse(std::string_view text)
{
    const std::string s = lowercase(trim(text));
    KRule rule;
    auto argument = [&](std::string_view prefix) {
        if (s.size() < prefix.size() + 2 || s.back() != ')')
            throw ConfigError("malformed k rule '" + s + "'");
        return std::string_view(s).substr(prefix.size(), s.size() - prefix.size() - 1);
    };
    if (s == "sqrt") {
        rule.kind = Kind::Sqrt;
    } else if (s.starts_with("fixed(")) {
        rule.kind = Kind::Fixed;
        rule.fixed = parse_count(argument("fixed("));
    } else if (s.starts_with("power(")) {
        rule.kind = Kind::Power;
        rule.alpha = parse_double(argument("power("));
    } else if (s.find_first_not_of("0123456789") == std::string::npos && !s.empty()) {
        rule.kind = Kind::Fixed;
        rule.fixed = parse_count(s);
    } else {
        throw ConfigError("unknown k rule '" + s + "' (expected sqrt, fixed(k) or power(alpha))");
    }
    if (rule.kind == Kind::Power && !(rule.alpha > 0.0 && rule.alpha < 1.0))
        throw ConfigError("k rule power(alpha) requires 0 < alpha < 1 (k = o(n)), got " + format_double(rule.alpha));
    if (rule.kind == Kind::Fixed && rule.fixed == 0)
        throw ConfigError("k rule fixed(k) requires k >= 1");
    return rule;
}

void ExperimentConfig::validate() const
{
    if (pattern.empty())
        throw ConfigError("config: no family members declared");
    try {
        require_common_family(pattern);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    const auto d = pattern.front().dim();
    if (n_values.empty())
        throw ConfigError("config: no n values in [sweep]");
    if (a_values.empty())
        throw ConfigError("config: no a values in [sweep]");
    if (k_rule.kind == KRule::Kind::Power && !(k_rule.alpha > 0.0 && k_rule.alpha < 1.0))
        throw ConfigError("config: power k rule requires 0 < alpha < 1");
    if (k_rule.kind == KRule::Kind::Fixed && k_rule.fixed == 0)
        throw ConfigError("config: fixed k rule requires k >= 1");
    for (auto n : n_values) {
        const auto k = k_rule.apply(n);
        if (k < 1 || k >= n)
            throw ConfigError("config: n = " + std::to_string(n) + " gives k = " + std::to_string(k) +
                              ", need 1 <= k < n");
    }
    for (const auto& a : a_values) {
        if (static_cast<std::size_t>(a.size()) != d)
            throw ConfigError("config: a value has dimension " + std::to_string(a.size()) + ", members have " +
                              std::to_string(d));
    }
    if (method == TVMethod::ScheffeQuadrature && d != 1)
        throw ConfigError("config: scheffe quadrature needs d = 1; use sum_mc or joint_mc");
    if (method != TVMethod::ScheffeQuadrature && samples == 0)
        throw ConfigError("config: samples must be >= 1");
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b)
{
    if (a.a_values.size() != b.a_values.size())
        return false;
    for (std::size_t i = 0; i < a.a_values.size(); ++i)
        if (a.a_values[i].size() != b.a_values[i].size() || a.a_values[i] != b.a_values[i])
            return false;
    return a.pattern == b.pattern && a.n_values == b.n_values && a.k_rule == b.k_rule && a.method == b.method &&
           a.ratio == b.ratio && a.samples == b.samples && a.seed == b.seed && a.output == b.output;
}

std::vector<FamilyMember> make_members(std::span<const FamilyMember> pattern, std::size_t n)
{
    if (pattern.empty())
        throw ConfigError("empty member pattern");
    std::vector<FamilyMember> out;
    out.reserve(n);
    for (std::size_t j = 0; j < n; ++j)
        out.push_back(pattern[j % pattern.size()].with_index(j + 1));
    return out;
}

Vec parse_vector(std::string_view text)
{
    std::vector<double> values;
    std::istringstream in{std::string(trim(text))};
    std::string tok;
    while (in >> tok)
        values.push_back(parse_double(tok));
    if (values.empty())
        throw ConfigError("expected at least one vector component");
    return Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::vector<double> parse_number_list(std::string_view text)
{
    const auto s = trim(text);
    if (s.starts_with("linspace(")) {
        if (!s.ends_with(")"))
            throw ConfigError("malformed linspace: '" + std::string(s) + "'");
        const auto args = split(s.substr(9, s.size() - 10), ',');
        if (args.size() != 3)
            throw ConfigError("linspace takes (lo, hi, count)");
        const double lo = parse_double(args[0]);
        const double hi = parse_double(args[1]);
        const auto count = parse_count(args[2]);
        if (count == 0)
            throw ConfigError("linspace count must be >= 1");
        std::vector<double> out(count);
        for (std::size_t i = 0; i < count; ++i)
            out[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
        return out;
    }
    std::vector<double> out;
    for (auto part : split(s, ','))
        out.push_back(parse_double(part));
    return out;
}

FamilyMember parse_member(std::string_view text)
{
    auto s = trim(text);
    if (s.size() < 2 || s.front() != '{' || s.back() != '}')
        throw ConfigError("member must look like {kind, key=value, ...}: '" + std::string(s) + "'");
    const auto fields = split(s.substr(1, s.size() - 2), ',');
    const std::string kind = lowercase(fields.front());
    std::vector<std::pair<std::string, std::string_view>> kv;
    for (std::size_t i = 1; i < fields.size(); ++i) {
        const auto eq = fields[i].find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("member field without '=': '" + std::string(fields[i]) + "'");
        kv.emplace_back(lowercase(trim(fields[i].substr(0, eq))), trim(fields[i].substr(eq + 1)));
    }
    auto get = [&](const std::string& key) -> std::string_view {
        for (const auto& [k, v] : kv)
            if (k == key)
                return v;
        throw ConfigError("member {" + kind + "} is missing '" + key + "'");
    };
    try {
        if (kind == "gamma")
            return FamilyMember::gamma(parse_double(get("shape")), parse_double(get("scale")));
        if (kind == "normal") {
            const Vec mean = parse_vector(get("mean"));
            const Vec cov_flat = parse_vector(get("cov"));
            const auto d = mean.size();
            if (cov_flat.size() != d * d)
                throw ConfigError("normal member: cov needs d*d row-major entries");
            Mat cov(d, d);
            for (Eigen::Index r = 0; r < d; ++r)
                for (Eigen::Index c = 0; c < d; ++c)
                    cov(r, c) = cov_flat(r * d + c);
            return FamilyMember::normal(mean, cov);
        }
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid member parameters: ") + e.what());
    }
    throw ConfigError("unknown member kind '" + kind + "' (expected gamma or normal)");
}

std::string serialize_member(const FamilyMember& m)
{
    if (m.kind() == FamilyKind::Gamma) {
        const auto& g = m.gamma_params();
        return "{gamma, shape=" + format_double(g.shape) + ", scale=" + format_double(g.scale) + "}";
    }
    const auto& p = m.normal_params();
    std::string mean;
    std::string cov;
    for (Eigen::Index i = 0; i < p.mean.size(); ++i)
        mean += (i ? " " : "") + format_double(p.mean(i));
    for (Eigen::Index r = 0; r < p.cov.rows(); ++r)
        for (Eigen::Index c = 0; c < p.cov.cols(); ++c)
            cov += ((r || c) ? " " : "") + format_double(p.cov(r, c));
    return "{normal, mean=" + mean + ", cov=" + cov + "}";
}

ExperimentConfig parse_config(std::string_view text)
{
    ExperimentConfig cfg;
    cfg.n_values.clear();
    std::string section;
    std::vector<double> gamma_shapes;
    double gamma_scale = 1.0;
    std::vector<double> normal_means;
    double normal_variance = 1.0;
    bool k_seen = false;

    std::size_t line_no = 0;
    for (auto raw : split(text, '\n')) {
        ++line_no;
        auto line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = trim(line.substr(0, hash));
        if (line.empty())
            continue;
        auto where = [&] { return "config line " + std::to_string(line_no) + ": "; };
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(where() + "unterminated section header");
            section = lowercase(trim(line.substr(1, line.size() - 2)));
            if (section != "family" && section != "sweep" && section != "estimator" && section != "output")
                throw ConfigError(where() + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(where() + "expected key = value");
        const std::string key = lowercase(trim(line.substr(0, eq)));
        const auto value = trim(line.substr(eq + 1));
        try {
            if (section == "family") {
                if (key == "member")
                    cfg.pattern.push_back(parse_member(value));
                else if (key == "gamma_shapes")
                    gamma_shapes = parse_number_list(value);
                else if (key == "gamma_scale")
                    gamma_scale = parse_double(value);
                else if (key == "normal_means")
                    normal_means = parse_number_list(value);
                else if (key == "normal_variance")
                    normal_variance = parse_double(value);
                else
                    throw ConfigError("unknown key '" + key + "' in [family]");
            } else if (section == "sweep") {
                if (key == "n") {
                    for (double v : parse_number_list(value)) {
                        if (v < 2.0 || v != std::floor(v))
                            throw ConfigError("n values must be integers >= 2");
                        cfg.n_values.push_back(static_cast<std::size_t>(v));
                    }
                } else if (key == "k") {
                    cfg.k_rule = KRule::parse(value);
                    k_seen = true;
                } else if (key == "a") {
                    cfg.a_values.push_back(parse_vector(value));
                } else {
                    throw ConfigError("unknown key '" + key + "' in [sweep]");
                }
            } else if (section == "estimator") {
                if (key == "method")
                    cfg.method = parse_tv_method(lowercase(value));
                else if (key == "ratio") {
                    const auto r = lowercase(value);
                    if (r == "exact")
                        cfg.ratio = RatioMethod::Exact;
                    else if (r == "edgeworth")
                        cfg.ratio = RatioMethod::Edgeworth;
                    else
                        throw ConfigError("ratio must be exact or edgeworth");
                } else if (key == "samples")
                    cfg.samples = parse_count(value);
                else if (key == "seed")
                    cfg.seed = std::stoull(std::string(value));
                else
                    throw ConfigError("unknown key '" + key + "' in [estimator]");
            } else if (section == "output") {
                if (key == "path")
                    cfg.output = std::string(value);
                else
                    throw ConfigError("unknown key '" + key + "' in [output]");
            } else {
                throw ConfigError("key '" + key + "' outside of a section");
            }
        } catch (const ConfigError& e) {
            throw ConfigError(where() + e.what());
        } catch (const std::exception& e) {
            throw ConfigError(where() + e.what());
        }
    }
    try {
        for (double shape : gamma_shapes)
            cfg.pattern.push_back(FamilyMember::gamma(shape, gamma_scale));
        for (double mean : normal_means)
            cfg.pattern.push_back(FamilyMember::normal(mean, normal_variance));
    } catch (const DomainError& e) {
        throw ConfigError(std::string("config: invalid generated member: ") + e.what());
    }
    if (!k_seen)
        cfg.k_rule = KRule{};
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& config)
{
    std::string out = "[family]\n";
    for (const auto& m : config.pattern)
        out += "member = " + serialize_member(m) + "\n";
    out += "\n[sweep]\nn = ";
    for (std::size_t i = 0; i < config.n_values.size(); ++i)
        out += (i ? ", " : "") + std::to_string(config.n_values[i]);
    out += "\nk = " + config.k_rule.to_string() + "\n";
    for (const auto& a : config.a_values) {
        out += "a =";
        for (Eigen::Index i = 0; i < a.size(); ++i)
            out += " " + format_double(a(i));
        out += "\n";
    }
    out += "\n[estimator]\nmethod = " + to_string(config.method) + "\n";
    out += std::string("ratio = ") + (config.ratio == RatioMethod::Exact ? "exact" : "edgeworth") + "\n";
    out += "samples = " + std::to_string(config.samples) + "\n";
    out += "seed = " + std::to_string(config.seed) + "\n";
    out += "\n[output]\npath = " + config.output + "\n";
    return out;
}

} // namespace gibbs
