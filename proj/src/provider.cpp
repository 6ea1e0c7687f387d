#include "smart/provider.hpp"

#include "smart/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace smart {

std::string to_string(RequestKind kind) {
    switch (kind) {
        case RequestKind::FeasibilityInitial: return "feasibility_initial";
        case RequestKind::FeasibilityRefine: return "feasibility_refine";
        case RequestKind::FeasibilityBoolean: return "feasibility_boolean";
        case RequestKind::Generation: return "generation";
        case RequestKind::Operationalization: return "operationalization";
        case RequestKind::Adjustment: return "adjustment";
        case RequestKind::Summary: return "summary";
    }
    return "?";
}

std::string HypothesisProvider::complete(const ProviderRequest& request) {
    std::string response = respond(request);
    transcript_.push_back({request.kind, request.user_message, response});
    return response;
}

std::string ScriptedProvider::respond(const ProviderRequest& request) {
    if (next_ >= responses_.size())
        throw ProviderError("scripted provider exhausted after " + std::to_string(next_) +
                            " responses (request kind: " + to_string(request.kind) + ")");
    return responses_[next_++];
}

std::string FileProvider::respond(const ProviderRequest& request) {
    switch (request.kind) {
        case RequestKind::FeasibilityInitial:
        case RequestKind::FeasibilityRefine:
            return "The listed covariates could plausibly relate to the outcome; "
                   "the pre-written hypotheses are assumed testable.";
        case RequestKind::FeasibilityBoolean:
            return "yes";
        case RequestKind::Generation: {
            std::ostringstream out;
            for (std::size_t i = 0; i < records_.size(); ++i) {
                out << "Hypothesis " << i + 1 << ": " << records_[i].text << "\n"
                    << "Justification: " << records_[i].justification << "\n\n";
            }
            return out.str();
        }
        case RequestKind::Operationalization: {
            std::ostringstream out;
            for (std::size_t i = 0; i < records_.size(); ++i) {
                if (!records_[i].operationalization) continue;
                out << "Hypothesis " << i + 1 << ": " << records_[i].text << "\n"
                    << "Operationalization: " << *records_[i].operationalization << "\n\n";
            }
            return out.str();
        }
        case RequestKind::Adjustment:
            return ""; // a file cannot repair a failing condition
        case RequestKind::Summary:
            return "";
    }
    return "";
}

FileProvider FileProvider::from_path(const std::string& path) {
    return FileProvider(load_hypothesis_file(path));
}

std::vector<HypothesisFileRecord> load_hypothesis_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingFileError("cannot open hypothesis file '" + path + "'");
    std::vector<HypothesisFileRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("hypothesis file '" + path + "' line " + std::to_string(line_no) +
                            ": " + e.what());
        }
        HypothesisFileRecord rec;
        if (!obj.contains("text") || !obj["text"].is_string())
            throw DataError("hypothesis file '" + path + "' line " + std::to_string(line_no) +
                            ": missing string field 'text'");
        rec.text = obj["text"].get<std::string>();
        rec.justification = obj.value("justification", std::string{});
        if (obj.contains("operationalization") && obj["operationalization"].is_string())
            rec.operationalization = obj["operationalization"].get<std::string>();
        records.push_back(std::move(rec));
    }
    if (records.empty()) throw DataError("hypothesis file '" + path + "' contains no records");
    return records;
}

std::vector<std::string> load_fixture_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingFileError("cannot open fixture file '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("fixture file '" + path + "': " + e.what());
    }
    if (!doc.is_array()) throw DataError("fixture file '" + path + "' must be a JSON array");
    std::vector<std::string> responses;
    for (const auto& item : doc) {
        if (!item.is_string())
            throw DataError("fixture file '" + path + "' must contain only strings");
        responses.push_back(item.get<std::string>());
    }
    return responses;
}

} // namespace smart
