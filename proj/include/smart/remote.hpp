#pragma once

#include "smart/provider.hpp"

#include <chrono>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace smart {

struct RemoteConfig {
    std::string endpoint_url; // e.g. http://localhost:8080/v1/chat/completions
    std::string model_name = "gpt-4";
    std::string api_key_env = "SMART_API_KEY";
    double temperature = 0.0;
    std::chrono::milliseconds timeout{30000};
    int max_retries = 3; // total attempts
    std::chrono::milliseconds retry_backoff{250}; // doubled per retry
    std::string system_message;

    void validate() const;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

// Injectable wire layer; the test suite never constructs the real one.
class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse post(const std::string& url,
                              const std::vector<std::pair<std::string, std::string>>& headers,
                              const std::string& body, std::chrono::milliseconds timeout) = 0;
};

// cpp-httplib backed transport (plain http; TLS endpoints need a terminating
// proxy in this build).
std::unique_ptr<Transport> make_http_transport();

// POSTs a chat-completion request and extracts the first choice's message
// content. Transient failures (transport errors, 5xx, 429) are retried with
// exponential backoff; the API key is read from the configured environment
// variable and never logged.
std::string chat_complete(const RemoteConfig& config, Transport& transport,
                          const std::string& system_message, const std::string& user_message,
                          std::ostream* debug_log = nullptr);

class RemoteProvider : public HypothesisProvider {
public:
    RemoteProvider(RemoteConfig config, std::unique_ptr<Transport> transport,
                   std::ostream* debug_log = nullptr)
        : config_(std::move(config)), transport_(std::move(transport)), debug_log_(debug_log) {}

    std::string kind_name() const override { return "remote"; }

protected:
    std::string respond(const ProviderRequest& request) override;

private:
    RemoteConfig config_;
    std::unique_ptr<Transport> transport_;
    std::ostream* debug_log_;
};

} // namespace smart
