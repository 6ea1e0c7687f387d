#include "smart/remote.hpp"

#include "smart/errors.hpp"

#include <json.hpp>

#define CPPHTTPLIB_NO_EXCEPTIONS
#include <httplib.h>

#include <cstdlib>
#include <ostream>
#include <thread>

namespace smart {

void RemoteConfig::validate() const {
    if (endpoint_url.rfind("http://", 0) != 0 && endpoint_url.rfind("https://", 0) != 0)
        throw ConfigError("endpoint url '" + endpoint_url + "' must start with http:// or https://");
    if (timeout.count() <= 0) throw ConfigError("remote timeout must be positive");
    if (max_retries < 1) throw ConfigError("max_retries must be >= 1");
    if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
}

namespace {

struct SplitUrl {
    std::string base; // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("malformed url '" + url + "'");
    std::size_t path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport : public Transport {
public:
    HttpResponse post(const std::string& url,
                      const std::vector<std::pair<std::string, std::string>>& headers,
                      const std::string& body, std::chrono::milliseconds timeout) override {
        SplitUrl parts = split_url(url);
        if (parts.base.rfind("https://", 0) == 0)
            throw TransportError("this build speaks plain http only; cannot reach '" +
                                 parts.base + "'");
        httplib::Client client(parts.base);
        client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
        client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
        httplib::Headers hl;
        for (const auto& [k, v] : headers) hl.emplace(k, v);
        auto res = client.Post(parts.path, hl, body, "application/json");
        if (!res) throw TransportError("transport failure: " + httplib::to_string(res.error()));
        return {res->status, res->body};
    }
};

std::string redact_headers_note(const std::vector<std::pair<std::string, std::string>>& headers) {
    std::string out;
    for (const auto& [k, v] : headers) {
        (void)v;
        if (!out.empty()) out += ", ";
        out += k;
        out += k == "Authorization" ? ": Bearer [redacted]" : "";
    }
    return out;
}

} // namespace

std::unique_ptr<Transport> make_http_transport() {
    return std::make_unique<HttplibTransport>();
}

std::string chat_complete(const RemoteConfig& config, Transport& transport,
                          const std::string& system_message, const std::string& user_message,
                          std::ostream* debug_log) {
    config.validate();

    const char* key = std::getenv(config.api_key_env.c_str());
    if (!key || !*key)
        throw MissingCredentialError("environment variable " + config.api_key_env +
                                     " is unset; no request was sent");

    nlohmann::json body;
    body["model"] = config.model_name;
    body["temperature"] = config.temperature;
    body["messages"] = nlohmann::json::array();
    if (!system_message.empty())
        body["messages"].push_back({{"role", "system"}, {"content", system_message}});
    body["messages"].push_back({{"role", "user"}, {"content", user_message}});
    const std::string payload = body.dump();

    std::vector<std::pair<std::string, std::string>> headers{
        {"Authorization", std::string("Bearer ") + key},
        {"Content-Type", "application/json"},
    };

    std::string last_error;
    auto backoff = config.retry_backoff;
    for (int attempt = 1; attempt <= config.max_retries; ++attempt) {
        if (debug_log)
            *debug_log << "[remote] POST " << config.endpoint_url << " attempt " << attempt
                       << " headers={" << redact_headers_note(headers) << "} body=" << payload
                       << "\n";
        HttpResponse response;
        bool transport_failed = false;
        try {
            response = transport.post(config.endpoint_url, headers, payload, config.timeout);
        } catch (const TransportError& e) {
            transport_failed = true;
            last_error = e.what();
        }

        if (!transport_failed) {
            if (debug_log)
                *debug_log << "[remote] status " << response.status << " body=" << response.body
                           << "\n";
            if (response.status >= 200 && response.status < 300) {
                nlohmann::json doc = nlohmann::json::parse(response.body, nullptr, false);
                if (doc.is_discarded())
                    throw MalformedResponseError("response body is not valid JSON");
                try {
                    return doc.at("choices").at(0).at("message").at("content")
                        .get<std::string>();
                } catch (const nlohmann::json::exception&) {
                    throw MalformedResponseError(
                        "response body lacks choices[0].message.content");
                }
            }
            if (response.status != 429 && response.status < 500)
                throw BadStatusError("endpoint returned status " +
                                     std::to_string(response.status));
            last_error = "status " + std::to_string(response.status);
        }

        if (attempt < config.max_retries) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    throw TransportError("request failed after " + std::to_string(config.max_retries) +
                         " attempts (" + last_error + ")");
}

std::string RemoteProvider::respond(const ProviderRequest& request) {
    const std::string system = request.system_message.empty() ? config_.system_message
                                                              : request.system_message;
    return chat_complete(config_, *transport_, system, request.user_message, debug_log_);
}

} // namespace smart
