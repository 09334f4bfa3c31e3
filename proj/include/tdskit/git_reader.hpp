// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdskit/config.hpp"
#include "tdskit/provenance.hpp"

namespace tdskit::provenance {

namespace detail {

struct CommandResult {
    int status = -1;
    std::string output;
};

inline CommandResult run_command(const std::string& command) {
    CommandResult result;
    FILE* pipe = ::popen(command.c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed for: " + command);
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) {
        result.output.append(buf.data(), n);
    }
    const int rc = ::pclose(pipe);
    result.status = rc;
    return result;
}

inline std::string shell_quote(const std::string& arg) {
    std::string out = "'";
    for (const char c : arg) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    out += "'";
    return out;
}

} // namespace detail

/// Repository reader backed by the git CLI; suitable for pre-commit hooks and
/// CI steps. All queries are read-only.
class GitReader : public RepositoryReader {
  public:
    explicit GitReader(std::filesystem::path repo_root, GovernancePolicy policy = {})
        : root_(std::move(repo_root)), policy_(std::move(policy)) {}

    std::vector<std::string> commits_in_range(const std::string& range) const override {
        const auto res = detail::run_command(git() + " rev-list --reverse " +
                                             detail::shell_quote(range) + " 2>/dev/null");
        if (res.status != 0) {
            throw ConfigError("git could not resolve the revision range '" + range + "'");
        }
        std::vector<std::string> ids;
        std::string line;
        std::istringstream in(res.output);
        while (std::getline(in, line)) {
            const std::string id = io::strip(line);
            if (!id.empty()) ids.push_back(id);
        }
        return ids;
    }

    CommitMeta commit(const std::string& id) const override {
        CommitMeta meta;
        meta.id = id;
        const auto msg = detail::run_command(git() + " show -s --format=%B " +
                                             detail::shell_quote(id) + " 2>/dev/null");
        if (msg.status != 0) throw ConfigError("git could not show commit " + id);
        meta.message = msg.output;
        meta.trailers = parse_trailers(meta.message, policy_);
        const auto paths = detail::run_command(git() + " diff-tree --no-commit-id --name-only -r --root " +
                                               detail::shell_quote(id) + " 2>/dev/null");
        if (paths.status == 0) {
            std::istringstream in(paths.output);
            std::string line;
            while (std::getline(in, line)) {
                const std::string p = io::strip(line);
                if (!p.empty()) meta.changed_paths.push_back(p);
            }
        }
        return meta;
    }

    std::optional<std::string> file_content(const std::string& revision,
                                            const std::string& path) const override {
        const auto res = detail::run_command(git() + " show " +
                                             detail::shell_quote(revision + ":" + path) +
                                             " 2>/dev/null");
        if (res.status != 0) return std::nullopt;
        return res.output;
    }

  private:
    std::string git() const { return "git -C " + detail::shell_quote(root_.string()); }

    std::filesystem::path root_;
    GovernancePolicy policy_;
};

} // namespace tdskit::provenance
