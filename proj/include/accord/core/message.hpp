#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <string>

#include "accord/core/job.hpp"

namespace accord {

// Globally unique without coordination: (proposing agent, per-agent counter).
struct ProposalId {
    AgentId proposer;
    std::uint64_t counter = 0;

    auto operator<=>(const ProposalId&) const = default;
    std::string str() const { return proposer + "#" + std::to_string(counter); }
};

enum class MsgKind { Proposal, Prepare, Commit };

const char* to_string(MsgKind k);

// One record of the three-phase exchange. A proposal binds to a single job
// for its whole lifetime; prepare/commit always carry the proposer they
// endorse. `cost` is meaningful on proposals only.
struct ConsensusMessage {
    MsgKind kind = MsgKind::Proposal;
    ProposalId proposal_id;
    JobId job_id;
    AgentId proposer;
    double cost = 0.0;
    AgentId sender;
    // Proposals carry the job body so validators can act on jobs that have
    // not reached their pool view yet.
    std::shared_ptr<const Job> job;
};

inline const char* to_string(MsgKind k) {
    switch (k) {
        case MsgKind::Proposal: return "proposal";
        case MsgKind::Prepare:  return "prepare";
        case MsgKind::Commit:   return "commit";
    }
    return "unknown";
}

}  // namespace accord
