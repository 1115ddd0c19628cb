#pragma once

// Pairwise synchronous products of linked service behaviors (deadlock and
// unmatched-communication detection) and bounded functional checking of a
// single service against its post-condition.

#include <string>
#include <vector>

#include "kmelia/assertions.hpp"
#include "kmelia/model.hpp"

namespace kmelia {

/// One channel shared by the two sides of a link: the channel name as seen
/// from the left (provider) behavior, the name seen from the right
/// (requirer) behavior, and the link label.
struct ChannelPair {
  std::string left;
  std::string right;
  std::string label;

  bool operator==(const ChannelPair&) const = default;
};

/// Channels of a link: its own endpoints plus every sublink (sublinks share
/// the parent's communication channel).
std::vector<ChannelPair> link_channels(const ResolvedModel& m, const Assembly& a, const AssemblyLink& l);

struct JointState {
  int left = 0;
  int right = 0;

  bool operator==(const JointState&) const = default;
};

enum class StepKind : std::uint8_t { Sync, Left, Right };

struct JointTransition {
  int from = 0;
  int to = 0;
  StepKind kind = StepKind::Sync;
  int left_transition = -1;   // index into left.transitions, -1 when left stutters
  int right_transition = -1;
  std::string label;          // `chan.msg` for Sync
};

struct ArityMismatch {
  int left_transition = -1;
  int right_transition = -1;
};

struct ProductLts {
  std::string link;
  std::string left_name = "L";
  std::string right_name = "R";
  Elts left;
  Elts right;
  std::vector<ChannelPair> channels;
  std::vector<JointState> states;  // reachable only, BFS discovery order; states[0] is initial
  std::vector<JointTransition> transitions;
  std::vector<int> finals;
  std::vector<int> deadlocks;
  std::vector<ArityMismatch> arity_mismatches;

  int find(JointState s) const;
  std::string state_name(int i) const;  // `(l,r)`
};

/// Reachable synchronous product. Emit/Receive on paired channels with the
/// same message and complementary directions synchronize; every other label
/// interleaves. Guards are may-transitions.
ProductLts product_of(const Elts& left, const Elts& right, const std::vector<ChannelPair>& channels,
                      std::string left_name = "L", std::string right_name = "R");

struct ProductBuild {
  std::optional<ProductLts> product;
  std::vector<Diagnostic> diagnostics;  // `no-behavior` and friends
};

ProductBuild build_product(const ResolvedModel& m, const Assembly& a, const AssemblyLink& l);

/// Shortest transition path (indices into p.transitions) from the initial
/// joint state to `target`.
std::vector<int> shortest_trace(const ProductLts& p, int target);

TraceWitness render_trace(const ProductLts& p, const std::vector<int>& trace);

/// `deadlock` Errors, `unmatched-emission` / `unmatched-reception` /
/// `unreachable-final` Warnings, `message-arity-mismatch` Errors.
std::vector<Diagnostic> compatibility_diagnostics(const ProductLts& p, const std::string& unit, SourceLoc loc);

std::vector<Diagnostic> check_compatibility(const ResolvedModel& m, const Assembly& a, const AssemblyLink& l);

/// Products for all top-level links (links that are nobody's sublink).
std::vector<Diagnostic> check_assembly_behavior(const ResolvedModel& m, const Assembly& a,
                                                std::vector<ProductLts>* products = nullptr);

std::string to_dot(const Elts& b, const std::string& name);
std::string to_dot(const ProductLts& p);

enum class PathOutcome : std::uint8_t { PostHolds, PostViolated, DepthExhausted };

struct PathResult {
  Valuation input;       // initial state and parameters
  std::vector<int> path; // indices into the behavior's transitions
  Valuation terminal;    // frame at the end of the path
  Valuation post_frame;  // old = input, current = terminal; what Post was evaluated under
  PathOutcome outcome = PathOutcome::PostHolds;
};

struct FunctionalOptions {
  int in_bound = 16;
  int set_bound = 8;
  int depth = 40;
  std::size_t max_inputs = 2'000'000;
  std::size_t max_recorded_paths = 2'000;
};

struct FunctionalResult {
  std::vector<Diagnostic> diagnostics;
  std::vector<PathResult> paths;
  std::size_t inputs = 0;      // admissible input valuations explored
  std::size_t violations = 0;
};

/// Explores every branch of the behavior for every admissible input within
/// the bound and checks Post at final states.
FunctionalResult check_functional(const ComponentDef& c, const ServiceDef& s, const FunctionalOptions& o);

}  // namespace kmelia
