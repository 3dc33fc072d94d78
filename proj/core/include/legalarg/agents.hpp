#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "legalarg/argument.hpp"
#include "legalarg/backend.hpp"
#include "legalarg/prompts.hpp"
#include "legalarg/reports.hpp"

namespace legalarg {

// Agents return raw model text; the pipelines parse it and reprompt once with
// `format_reminder` set when parsing fails.

struct DeveloperTurn {
  PromptVariant variant = PromptVariant::SA;
  const PlyContext& context;
  std::optional<Revision> revision;
  bool format_reminder = false;
};

class Developer {
 public:
  virtual ~Developer() = default;
  // SA/SA-EP: a 3-ply object. MA/RMA: a single-key object for context.ply.
  virtual std::string respond(const DeveloperTurn& turn) = 0;
  virtual std::string name() const = 0;
};

class Analyst {
 public:
  virtual ~Analyst() = default;
  virtual std::string review(const PlyContext& context, std::string_view ply_text,
                             bool format_reminder) = 0;
  virtual std::string name() const = 0;
};

class Polisher {
 public:
  virtual ~Polisher() = default;
  virtual std::string review(const PlyContext& context, std::string_view ply_text,
                             const AnalystReport& analyst, bool format_reminder) = 0;
  virtual std::string name() const = 0;
};

// The Factor Analyst decision procedure applied to claims read from one ply:
//   rule 2  abstain if the primary precedent shares no factor with c1 or its
//           outcome does not favor the arguing party. For the rebuttal, 2a
//           needs claimed c2 commonality, zero true c1∩c2 and no valid
//           distinction of c3; 2b is the c2 outcome check.
//   rule 3  correct if a claim attributes a factor a case lacks, denies one
//           it has, or misstates a precedent outcome.
//   rule 4  otherwise valid.
AnalystReport oracle_analyst(const PlyContext& context, const CanonicalExtraction& claims,
                             const FactorCatalog& catalog = load_catalog());

// Factors of the arguing side shared by c1 and the primary precedent.
std::vector<FactorId> favorable_shared(const PlyContext& context, const FactorCatalog& catalog);

// revision_needed = analyst correction or a favorable shared factor not
// claimed for both c1 and the primary precedent. Utilization is the cited
// share of favorable shared factors: 100% Excellent, >=75% Good, >=50% Fair,
// else Poor. Accuracy: Accurate iff the analyst found the ply valid, Minor
// for a single error, Major otherwise. Strength: Strong iff Accurate with
// Excellent or Good utilization, Weak for Poor utilization or Major errors,
// else Moderate. Throws ContractViolation after an abstention verdict.
PolisherReport oracle_polisher(const PlyContext& context, const AnalystReport& analyst,
                               const CanonicalExtraction& claims,
                               const FactorCatalog& catalog = load_catalog());

// Correction details followed by the polisher's instructions.
std::string consolidate_feedback(const AnalystReport& analyst, const PolisherReport& polisher);

class OracleAnalyst final : public Analyst {
 public:
  explicit OracleAnalyst(const FactorCatalog& catalog = load_catalog()) : catalog_(catalog) {}
  std::string review(const PlyContext& context, std::string_view ply_text,
                     bool format_reminder) override;
  std::string name() const override { return "oracle"; }

 private:
  const FactorCatalog& catalog_;
};

class OraclePolisher final : public Polisher {
 public:
  explicit OraclePolisher(const FactorCatalog& catalog = load_catalog()) : catalog_(catalog) {}
  std::string review(const PlyContext& context, std::string_view ply_text,
                     const AnalystReport& analyst, bool format_reminder) override;
  std::string name() const override { return "oracle"; }

 private:
  const FactorCatalog& catalog_;
};

enum class MockBehavior { Faithful, Fabricating, NonAbstaining };

std::string_view to_string(MockBehavior behavior);
std::optional<MockBehavior> mock_behavior_from_string(std::string_view text);

// One fabricated attribution planned for a triple.
struct Fabrication {
  int ply = 1;
  Slot slot = Slot::c1;
  FactorId factor;

  bool operator==(const Fabrication&) const = default;
};

// LLM-free developer writing canonical-syntax plies:
//   ply 1  "c1 and c2 (outcome Plaintiff) share ..."
//   ply 2  "c2 has ..., which c1 does not have. c1 and c3 (outcome Defendant) share ..."
//   ply 3  "c3 has ..., which c1 does not have. c1 has ..., which c3 does not have.
//           c1 and c2 share ..."
// Faithful cites every true factor and answers TERMINATE where the analyst
// rules require abstention. Fabricating adds `fabrications` sentences of the
// form "<slot> also has F<x> ..." with x outside that slot's factors; a
// revision drops them. NonAbstaining never terminates and, when a precedent
// shares nothing with c1, claims one of its factors as shared.
class MockDeveloper final : public Developer {
 public:
  MockDeveloper(MockBehavior behavior, int fabrications = 0, std::uint64_t seed = 0,
                const FactorCatalog& catalog = load_catalog());

  std::string respond(const DeveloperTurn& turn) override;
  std::string name() const override;

  // Deterministic in (seed, triple.seed).
  std::vector<Fabrication> plan_fabrications(const CaseTriple& triple) const;
  // Ply text, or TERMINATE text when this developer abstains at that ply.
  std::string ply_text(const CaseTriple& triple, int ply, bool revised) const;
  // First ply this developer abstains at, if any.
  std::optional<int> abstains_at(const CaseTriple& triple) const;
  // Factors this developer claims per slot over an unrevised argument,
  // fabrications excluded.
  ExtractedFactors declared_claims(const CaseTriple& triple) const;

 private:
  MockBehavior behavior_;
  int fabrications_;
  std::uint64_t seed_;
  const FactorCatalog& catalog_;
};

class LlmDeveloper final : public Developer {
 public:
  LlmDeveloper(std::shared_ptr<ChatBackend> backend, GenerationParams params = {},
               const FactorCatalog& catalog = load_catalog());
  std::string respond(const DeveloperTurn& turn) override;
  std::string name() const override { return backend_->model(); }

 private:
  std::shared_ptr<ChatBackend> backend_;
  GenerationParams params_;
  const FactorCatalog& catalog_;
};

class LlmAnalyst final : public Analyst {
 public:
  LlmAnalyst(std::shared_ptr<ChatBackend> backend, GenerationParams params = {},
             const FactorCatalog& catalog = load_catalog());
  std::string review(const PlyContext& context, std::string_view ply_text,
                     bool format_reminder) override;
  std::string name() const override { return backend_->model(); }

 private:
  std::shared_ptr<ChatBackend> backend_;
  GenerationParams params_;
  const FactorCatalog& catalog_;
};

class LlmPolisher final : public Polisher {
 public:
  LlmPolisher(std::shared_ptr<ChatBackend> backend, GenerationParams params = {},
              const FactorCatalog& catalog = load_catalog());
  std::string review(const PlyContext& context, std::string_view ply_text,
                     const AnalystReport& analyst, bool format_reminder) override;
  std::string name() const override { return backend_->model(); }

 private:
  std::shared_ptr<ChatBackend> backend_;
  GenerationParams params_;
  const FactorCatalog& catalog_;
};

}  // namespace legalarg
