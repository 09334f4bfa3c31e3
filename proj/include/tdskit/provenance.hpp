// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tdskit/config.hpp"

namespace tdskit::provenance {

/// One commit as seen by the checks.
struct CommitMeta {
    std::string id;
    std::string message;
    std::vector<std::pair<std::string, std::string>> trailers; ///< parsed, canonical keys
    std::vector<std::string> changed_paths;
};

enum class Severity { error, warning };

inline const char* severity_name(Severity s) { return s == Severity::error ? "error" : "warning"; }

struct Violation {
    std::string rule;     ///< stable identifier
    Severity severity = Severity::error;
    std::string location; ///< commit id or file path
    std::string message;

    bool operator==(const Violation& other) const = default;
};

/// Machine-checkable policy: disclosure trailers, issue linkage, session-log
/// requirements, and required AGENTS.md sections.
struct GovernancePolicy {
    std::string disclosure_key = "AI-Assisted";
    std::vector<std::string> disclosure_values = {"yes", "no", "partial"};
    std::vector<std::string> assisted_values = {"yes", "partial"}; ///< values that require detail
    std::vector<std::string> required_detail_keys = {"AI-Tool", "AI-Model"};
    std::string session_log_key = "Session-Log";
    std::string session_log_extension = ".jsonl";
    std::string issue_pattern = "#[0-9]+";
    std::vector<std::string> agents_md_sections = {"task execution", "testing", "documentation",
                                                   "provenance"};
    std::string agents_md_path = "AGENTS.md";
    Severity commit_rule_severity = Severity::error;   ///< provenance rules are non-negotiable
    Severity agents_rule_severity = Severity::warning;

    /// Canonical trailer keys for case normalization.
    std::vector<std::string> known_keys() const {
        std::vector<std::string> keys = {disclosure_key, session_log_key, "Issue"};
        keys.insert(keys.end(), required_detail_keys.begin(), required_detail_keys.end());
        return keys;
    }
};

/// Loads policy overrides from the shared config format; absent keys keep
/// their defaults.
inline GovernancePolicy load_policy(const Config& cfg) {
    GovernancePolicy policy;
    auto list = [](const std::string& csv) {
        std::vector<std::string> out;
        for (const auto& item : io::split_csv(csv)) {
            if (!item.empty()) out.push_back(item);
        }
        return out;
    };
    policy.disclosure_key = cfg.get_string_or("provenance", "disclosure_key", policy.disclosure_key);
    if (cfg.has("provenance", "disclosure_values")) {
        policy.disclosure_values = list(cfg.get_string("provenance", "disclosure_values"));
    }
    if (cfg.has("provenance", "assisted_values")) {
        policy.assisted_values = list(cfg.get_string("provenance", "assisted_values"));
    }
    if (cfg.has("provenance", "required_detail_keys")) {
        policy.required_detail_keys = list(cfg.get_string("provenance", "required_detail_keys"));
    }
    policy.session_log_key = cfg.get_string_or("provenance", "session_log_key", policy.session_log_key);
    policy.issue_pattern = cfg.get_string_or("provenance", "issue_pattern", policy.issue_pattern);
    if (cfg.has("provenance", "agents_md_sections")) {
        policy.agents_md_sections = list(cfg.get_string("provenance", "agents_md_sections"));
    }
    policy.agents_md_path = cfg.get_string_or("provenance", "agents_md_path", policy.agents_md_path);
    return policy;
}

namespace detail {

inline std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return out;
}

inline bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
               return std::tolower(x) == std::tolower(y);
           });
}

/// Title-Case each hyphen-separated part: "session-log" -> "Session-Log".
inline std::string title_case_key(std::string_view key) {
    std::string out(key);
    bool start = true;
    for (char& c : out) {
        if (c == '-') {
            start = true;
        } else {
            c = start ? char(std::toupper(static_cast<unsigned char>(c)))
                      : char(std::tolower(static_cast<unsigned char>(c)));
            start = false;
        }
    }
    return out;
}

inline bool is_trailer_line(const std::string& line) {
    static const std::regex pattern(R"(^[A-Za-z0-9][A-Za-z0-9-]*:\s?.*$)");
    return std::regex_match(line, pattern);
}

} // namespace detail

/// Parses the final contiguous `Key: value` block of a commit message
/// (git-trailer convention). Keys are normalized to canonical case; repeated
/// keys keep their order. Messages without a trailer block yield an empty map.
inline std::vector<std::pair<std::string, std::string>> parse_trailers(
    const std::string& message, const GovernancePolicy& policy = {}) {
    std::vector<std::string> lines;
    {
        std::istringstream in(message);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            lines.push_back(line);
        }
    }
    while (!lines.empty() && io::strip(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) return {};

    // find the last blank-line-separated block
    std::size_t block_start = 0;
    for (std::size_t i = lines.size(); i-- > 0;) {
        if (io::strip(lines[i]).empty()) {
            block_start = i + 1;
            break;
        }
    }
    if (block_start == 0) return {}; // subject-only message, no separate block

    std::vector<std::pair<std::string, std::string>> trailers;
    for (std::size_t i = block_start; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (detail::is_trailer_line(line)) {
            const auto colon = line.find(':');
            std::string key = io::strip(line.substr(0, colon));
            for (const auto& canon : policy.known_keys()) {
                if (detail::iequals(key, canon)) {
                    key = canon;
                    break;
                }
            }
            if (key.find('-') != std::string::npos || std::islower((unsigned char)key[0])) {
                bool known = false;
                for (const auto& canon : policy.known_keys()) known |= (key == canon);
                if (!known) key = detail::title_case_key(key);
            }
            trailers.emplace_back(key, io::strip(line.substr(colon + 1)));
        } else if (!trailers.empty() && !line.empty() &&
                   (line.front() == ' ' || line.front() == '\t')) {
            trailers.back().second += " " + io::strip(line); // folded continuation
        } else {
            return {}; // mixed block: not a trailer block
        }
    }
    return trailers;
}

inline std::optional<std::string> trailer_value(const CommitMeta& meta, std::string_view key) {
    for (const auto& [k, v] : meta.trailers) {
        if (detail::iequals(k, key)) return v;
    }
    return std::nullopt;
}

/// Commit-level disclosure and issue-linkage rules. An empty result means the
/// commit is compliant.
inline std::vector<Violation> check_commit(const CommitMeta& meta, const GovernancePolicy& policy) {
    std::vector<Violation> out;
    const auto severity = policy.commit_rule_severity;

    const auto disclosure = trailer_value(meta, policy.disclosure_key);
    if (!disclosure) {
        out.push_back({"ai-disclosure-missing", severity, meta.id,
                       "commit lacks the " + policy.disclosure_key + " trailer"});
    } else {
        const bool valid = std::any_of(policy.disclosure_values.begin(),
                                       policy.disclosure_values.end(), [&](const std::string& v) {
                                           return detail::iequals(v, *disclosure);
                                       });
        if (!valid) {
            out.push_back({"ai-disclosure-invalid-value", severity, meta.id,
                           policy.disclosure_key + " value '" + *disclosure +
                               "' is not one of {yes, no, partial}"});
        } else {
            const bool assisted = std::any_of(policy.assisted_values.begin(),
                                              policy.assisted_values.end(), [&](const std::string& v) {
                                                  return detail::iequals(v, *disclosure);
                                              });
            if (assisted) {
                for (const auto& key : policy.required_detail_keys) {
                    if (!trailer_value(meta, key)) {
                        out.push_back({detail::lower(key) + "-missing", severity, meta.id,
                                       "AI-assisted commit lacks the " + key + " trailer"});
                    }
                }
                if (!trailer_value(meta, policy.session_log_key)) {
                    out.push_back({"session-log-missing-trailer", severity, meta.id,
                                   "AI-assisted commit lacks the " + policy.session_log_key +
                                       " trailer"});
                }
            }
        }
    }

    const std::regex issue(policy.issue_pattern);
    bool linked = std::regex_search(meta.message, issue);
    for (const auto& [k, v] : meta.trailers) linked = linked || std::regex_search(v, issue);
    if (!linked) {
        out.push_back({"issue-reference-missing", severity, meta.id,
                       "commit references no issue matching '" + policy.issue_pattern + "'"});
    }
    return out;
}

/// Read-only repository access: commit listing, file content at a revision.
/// Keeps the checks testable on fixture data without a real repository.
class RepositoryReader {
  public:
    virtual ~RepositoryReader() = default;
    virtual std::vector<std::string> commits_in_range(const std::string& range) const = 0;
    virtual CommitMeta commit(const std::string& id) const = 0;
    virtual std::optional<std::string> file_content(const std::string& revision,
                                                    const std::string& path) const = 0;
};

/// Session-log presence and JSON-Lines well-formedness at the commit's
/// revision. Only called when the commit declares a log path.
inline std::vector<Violation> check_session_log(const CommitMeta& meta,
                                                const RepositoryReader& reader,
                                                const GovernancePolicy& policy) {
    std::vector<Violation> out;
    const auto severity = policy.commit_rule_severity;
    const auto path = trailer_value(meta, policy.session_log_key);
    if (!path) return out;

    if (path->size() < policy.session_log_extension.size() ||
        path->substr(path->size() - policy.session_log_extension.size()) !=
            policy.session_log_extension) {
        out.push_back({"session-log-not-jsonl", severity, *path,
                       "session log '" + *path + "' must use the " +
                           policy.session_log_extension + " extension"});
    }

    const bool in_changed =
        std::find(meta.changed_paths.begin(), meta.changed_paths.end(), *path) !=
        meta.changed_paths.end();
    const auto content = reader.file_content(meta.id, *path);
    if (!in_changed && !content) {
        out.push_back({"session-log-missing", severity, *path,
                       "declared session log '" + *path + "' is neither changed nor tracked at " +
                           meta.id});
        return out;
    }
    if (!content) {
        out.push_back({"session-log-unreadable", severity, *path,
                       "declared session log '" + *path + "' cannot be read at " + meta.id});
        return out;
    }

    std::istringstream in(*content);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = io::strip(line);
        if (stripped.empty()) continue;
        if (!nlohmann::json::accept(stripped)) {
            out.push_back({"session-log-malformed", severity, *path,
                           "session log '" + *path + "' line " + std::to_string(lineno) +
                               " is not valid JSON"});
            break;
        }
    }
    return out;
}

/// Required-section presence in AGENTS.md. Headings match case-insensitively
/// at any level and in any order.
inline std::vector<Violation> check_agents_md(const std::string& content,
                                              const GovernancePolicy& policy) {
    std::vector<Violation> out;
    std::vector<std::string> headings;
    {
        std::istringstream in(content);
        std::string line;
        while (std::getline(in, line)) {
            const std::string s = io::strip(line);
            if (!s.empty() && s.front() == '#') {
                headings.push_back(detail::lower(s.substr(s.find_first_not_of('#'))));
            }
        }
    }
    for (const auto& section : policy.agents_md_sections) {
        const std::string want = detail::lower(section);
        const bool found = std::any_of(headings.begin(), headings.end(), [&](const std::string& h) {
            return h.find(want) != std::string::npos;
        });
        if (!found) {
            out.push_back({"agents-section-missing", policy.agents_rule_severity,
                           policy.agents_md_path,
                           "required section '" + section + "' not found in " +
                               policy.agents_md_path});
        }
    }
    return out;
}

struct CommitStatus {
    std::string id;
    bool compliant = true;
    std::vector<std::string> rules; ///< fired rule identifiers
};

struct Report {
    std::vector<Violation> violations;
    std::vector<CommitStatus> per_commit;
    std::size_t commits_checked = 0;
    int exit_code = 0;
    std::string note;
};

/// Aggregates commit checks over a range plus the AGENTS.md check at the
/// range head. Exit code 0 means no error-severity violations.
inline Report run_checks(const std::string& range, const RepositoryReader& reader,
                         const GovernancePolicy& policy) {
    Report report;
    const auto ids = reader.commits_in_range(range);
    report.commits_checked = ids.size();
    if (ids.empty()) report.note = "no commits checked";

    for (const auto& id : ids) {
        const auto meta = reader.commit(id);
        auto violations = check_commit(meta, policy);
        if (trailer_value(meta, policy.session_log_key)) {
            const auto log_violations = check_session_log(meta, reader, policy);
            violations.insert(violations.end(), log_violations.begin(), log_violations.end());
        }
        CommitStatus status;
        status.id = id;
        status.compliant = violations.empty();
        for (const auto& v : violations) status.rules.push_back(v.rule);
        report.per_commit.push_back(std::move(status));
        report.violations.insert(report.violations.end(), violations.begin(), violations.end());
    }

    const std::string head = ids.empty() ? std::string("HEAD") : ids.back();
    const auto agents = reader.file_content(head, policy.agents_md_path);
    const auto agents_violations = check_agents_md(agents.value_or(""), policy);
    report.violations.insert(report.violations.end(), agents_violations.begin(),
                             agents_violations.end());

    const bool failed = std::any_of(report.violations.begin(), report.violations.end(),
                                    [](const Violation& v) { return v.severity == Severity::error; });
    report.exit_code = failed ? 1 : 0;
    return report;
}

inline nlohmann::json report_to_json(const Report& report) {
    nlohmann::json j;
    j["commits_checked"] = report.commits_checked;
    j["exit_code"] = report.exit_code;
    if (!report.note.empty()) j["note"] = report.note;
    j["violations"] = nlohmann::json::array();
    for (const auto& v : report.violations) {
        j["violations"].push_back({{"rule", v.rule},
                                   {"severity", severity_name(v.severity)},
                                   {"location", v.location},
                                   {"message", v.message}});
    }
    return j;
}

inline std::vector<Violation> violations_from_json(const nlohmann::json& j) {
    std::vector<Violation> out;
    for (const auto& item : j.at("violations")) {
        Violation v;
        v.rule = item.at("rule").get<std::string>();
        v.severity = item.at("severity").get<std::string>() == "error" ? Severity::error
                                                                       : Severity::warning;
        v.location = item.at("location").get<std::string>();
        v.message = item.at("message").get<std::string>();
        out.push_back(std::move(v));
    }
    return out;
}

inline std::string report_to_text(const Report& report) {
    std::ostringstream out;
    for (const auto& v : report.violations) {
        out << severity_name(v.severity) << ": " << v.rule << " (" << v.location << "): "
            << v.message << '\n';
    }
    out << report.commits_checked << " commit(s) checked, " << report.violations.size()
        << " finding(s)";
    if (!report.note.empty()) out << " [" << report.note << "]";
    out << '\n';
    return out.str();
}

/// Fixture-backed reader: commits in declaration order, one shared file tree.
class FixtureReader : public RepositoryReader {
  public:
    FixtureReader(std::vector<CommitMeta> commits, std::map<std::string, std::string> files)
        : commits_(std::move(commits)), files_(std::move(files)) {}

    /// Loads the JSON corpus format: {"commits":[{id,message,changed_paths}],
    /// "files":{path:content}}. Trailers are parsed from the messages.
    static FixtureReader from_json(const nlohmann::json& j, const GovernancePolicy& policy = {}) {
        std::vector<CommitMeta> commits;
        for (const auto& c : j.at("commits")) {
            CommitMeta meta;
            meta.id = c.at("id").get<std::string>();
            meta.message = c.at("message").get<std::string>();
            meta.trailers = parse_trailers(meta.message, policy);
            if (c.contains("changed_paths")) {
                for (const auto& p : c.at("changed_paths")) {
                    meta.changed_paths.push_back(p.get<std::string>());
                }
            }
            commits.push_back(std::move(meta));
        }
        std::map<std::string, std::string> files;
        if (j.contains("files")) {
            for (const auto& [path, content] : j.at("files").items()) {
                files[path] = content.get<std::string>();
            }
        }
        return FixtureReader(std::move(commits), std::move(files));
    }

    std::vector<std::string> commits_in_range(const std::string& range) const override {
        std::vector<std::string> ids;
        if (range == "none") return ids; // empty-range fixture convention
        for (const auto& c : commits_) ids.push_back(c.id);
        return ids;
    }

    CommitMeta commit(const std::string& id) const override {
        for (const auto& c : commits_) {
            if (c.id == id) return c;
        }
        throw std::invalid_argument("FixtureReader: unknown commit " + id);
    }

    std::optional<std::string> file_content(const std::string&,
                                            const std::string& path) const override {
        const auto it = files_.find(path);
        if (it == files_.end()) return std::nullopt;
        return it->second;
    }

  private:
    std::vector<CommitMeta> commits_;
    std::map<std::string, std::string> files_;
};

} // namespace tdskit::provenance
