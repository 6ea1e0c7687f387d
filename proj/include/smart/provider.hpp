#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace smart {

enum class RequestKind {
    FeasibilityInitial,
    FeasibilityRefine,
    FeasibilityBoolean,
    Generation,
    Operationalization,
    Adjustment,
    Summary,
};

std::string to_string(RequestKind kind);

struct ProviderRequest {
    RequestKind kind;
    std::string system_message;
    std::string user_message;
};

struct TranscriptEntry {
    RequestKind kind;
    std::string prompt;
    std::string response;
};

// A source of natural-language failure hypotheses. One interface, three
// kinds: replayed fixtures (scripted), pre-written hypothesis files, and a
// remote chat endpoint.
class HypothesisProvider {
public:
    virtual ~HypothesisProvider() = default;

    std::string complete(const ProviderRequest& request);

    virtual std::string kind_name() const = 0;

    const std::vector<TranscriptEntry>& transcript() const { return transcript_; }
    std::size_t call_count() const { return transcript_.size(); }

protected:
    virtual std::string respond(const ProviderRequest& request) = 0;

private:
    std::vector<TranscriptEntry> transcript_;
};

// Replays a fixed response list in order; exhaustion is a provider error.
class ScriptedProvider : public HypothesisProvider {
public:
    explicit ScriptedProvider(std::vector<std::string> responses)
        : responses_(std::move(responses)) {}

    std::string kind_name() const override { return "scripted"; }
    std::size_t remaining() const { return responses_.size() - next_; }

protected:
    std::string respond(const ProviderRequest& request) override;

private:
    std::vector<std::string> responses_;
    std::size_t next_ = 0;
};

struct HypothesisFileRecord {
    std::string text;
    std::string justification;
    std::optional<std::string> operationalization;
};

// Answers prompts from pre-written hypothesis records. Feasibility is always
// affirmative; adjustment requests cannot be repaired from a file.
class FileProvider : public HypothesisProvider {
public:
    explicit FileProvider(std::vector<HypothesisFileRecord> records)
        : records_(std::move(records)) {}

    static FileProvider from_path(const std::string& path);

    std::string kind_name() const override { return "file"; }
    const std::vector<HypothesisFileRecord>& records() const { return records_; }

protected:
    std::string respond(const ProviderRequest& request) override;

private:
    std::vector<HypothesisFileRecord> records_;
};

// JSON Lines, one object per hypothesis: {"text": .., "justification": ..,
// "operationalization": ..?}
std::vector<HypothesisFileRecord> load_hypothesis_file(const std::string& path);

// JSON array of raw response strings.
std::vector<std::string> load_fixture_file(const std::string& path);

} // namespace smart
