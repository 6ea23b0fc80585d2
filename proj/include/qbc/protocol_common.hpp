// Copyright 2026 The qbc-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qbc/qcore.hpp"

namespace qbc {

enum class FailureReason : uint8_t {
    None,
    CommitMismatch,
    NonCommitMismatch,
    DecoyMismatch,
    EvidenceMismatch,
    CertificateMismatch,
    Malformed,
};

inline const char *to_string(FailureReason r) {
    switch (r) {
        case FailureReason::None:
            return "none";
        case FailureReason::CommitMismatch:
            return "commit_mismatch";
        case FailureReason::NonCommitMismatch:
            return "noncommit_mismatch";
        case FailureReason::DecoyMismatch:
            return "decoy_mismatch";
        case FailureReason::EvidenceMismatch:
            return "evidence_mismatch";
        case FailureReason::CertificateMismatch:
            return "certificate_mismatch";
        case FailureReason::Malformed:
            return "malformed";
    }
    return "?";
}

/// Receiver's decision. accepted holds exactly when reason is None.
struct Verdict {
    FailureReason reason = FailureReason::None;

    bool accepted() const { return reason == FailureReason::None; }

    static Verdict accept() { return {}; }
    static Verdict reject(FailureReason r) { return {r}; }

    friend bool operator==(const Verdict &, const Verdict &) = default;
};

/// Ordered classical messages of one protocol run.
class MessageLog {
  public:
    struct Entry {
        std::string sender;
        std::string step;
        nlohmann::json payload;
    };

    void add(std::string sender, std::string step, nlohmann::json payload) {
        entries_.push_back({std::move(sender), std::move(step), std::move(payload)});
    }

    const std::vector<Entry> &entries() const { return entries_; }

    nlohmann::json to_json() const {
        nlohmann::json out = nlohmann::json::array();
        for (const auto &e : entries_) {
            out.push_back({{"sender", e.sender}, {"step", e.step}, {"payload", e.payload}});
        }
        return out;
    }

  private:
    std::vector<Entry> entries_;
};

inline void log_message(MessageLog *log, const char *sender, const char *step, nlohmann::json payload) {
    if (log) {
        log->add(sender, step, std::move(payload));
    }
}

inline std::string bits_to_string(const std::vector<int> &bits) {
    std::string s;
    s.reserve(bits.size());
    for (int b : bits) {
        s.push_back(b ? '1' : '0');
    }
    return s;
}

inline std::vector<int> bits_from_string(const std::string &s) {
    std::vector<int> out;
    out.reserve(s.size());
    for (char c : s) {
        if (c != '0' && c != '1') {
            throw std::invalid_argument("bits_from_string: expected only 0 and 1");
        }
        out.push_back(c == '1');
    }
    return out;
}

inline nlohmann::json states_to_json(const std::vector<Bb84State> &states) {
    std::string s;
    for (const auto &st : states) {
        s += st.name();
    }
    return s;
}

inline std::vector<Bb84State> states_from_json(const nlohmann::json &j) {
    std::vector<Bb84State> out;
    for (char c : j.get<std::string>()) {
        switch (c) {
            case '0':
                out.push_back({Basis::Z, 0});
                break;
            case '1':
                out.push_back({Basis::Z, 1});
                break;
            case '+':
                out.push_back({Basis::X, 0});
                break;
            case '-':
                out.push_back({Basis::X, 1});
                break;
            default:
                throw std::invalid_argument("states_from_json: unknown state symbol");
        }
    }
    return out;
}

inline nlohmann::json key_to_json(const PauliKey &key) {
    std::string s;
    for (const auto &b : key.bits) {
        s.push_back(static_cast<char>('0' + (b.x ? 1 : 0) + (b.z ? 2 : 0)));
    }
    return s;
}

inline PauliKey key_from_json(const nlohmann::json &j) {
    PauliKey key;
    for (char c : j.get<std::string>()) {
        if (c < '0' || c > '3') {
            throw std::invalid_argument("key_from_json: expected digits 0-3");
        }
        key.bits.push_back({((c - '0') & 1) != 0, ((c - '0') & 2) != 0});
    }
    return key;
}

}  // namespace qbc
