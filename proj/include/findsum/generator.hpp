#pragma once

// External process protocol. Generators (and external classifiers) are child
// processes speaking newline-delimited JSON over stdin/stdout:
//
//   generator request:  {"id":int,"kind":"summarize"|"tuple2text","input":str,
//                        "hints":{"beam_size":int,"max_len":int}}
//   generator response: {"id":int,"output":str} | {"id":int,"error":str}
//
//   classifier request:  {"features":[...]}     response: {"proba":p}
//
// Requests and responses pair 1:1 by id; responses may arrive out of order.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <condition_variable>
#include <cstring>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "findsum/errors.hpp"

namespace findsum {

struct GeneratorHandle {
    std::string command;
    double timeout_sec = 30.0;
    int max_concurrent = 4;
};

struct GenerationHints {
    int beam_size = 5;
    int max_len = 0;  // 0 = generator default
};

namespace procdetail {

inline std::vector<std::string> split_command(const std::string& command) {
    std::vector<std::string> args;
    std::string cur;
    char quote = 0;
    for (char c : command) {
        if (quote) {
            if (c == quote)
                quote = 0;
            else
                cur.push_back(c);
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == ' ' || c == '\t') {
            if (!cur.empty()) {
                args.push_back(cur);
                cur.clear();
            }
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) args.push_back(cur);
    return args;
}

}  // namespace procdetail

// A child process with line-oriented stdin/stdout pipes.
class LineProcess {
public:
    explicit LineProcess(const std::string& command) {
        auto args = procdetail::split_command(command);
        if (args.empty()) throw GeneratorFailure("empty generator command");
        int to_child[2], from_child[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0)
            throw GeneratorFailure("pipe() failed: " + std::string(strerror(errno)));
        pid_ = fork();
        if (pid_ < 0) throw GeneratorFailure("fork() failed");
        if (pid_ == 0) {
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            close(to_child[0]);
            close(to_child[1]);
            close(from_child[0]);
            close(from_child[1]);
            std::vector<char*> argv;
            for (auto& a : args) argv.push_back(a.data());
            argv.push_back(nullptr);
            execvp(argv[0], argv.data());
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        in_fd_ = to_child[1];
        out_fd_ = from_child[0];
    }

    LineProcess(const LineProcess&) = delete;
    LineProcess& operator=(const LineProcess&) = delete;

    ~LineProcess() {
        close_stdin();
        if (out_fd_ >= 0) close(out_fd_);
        if (pid_ > 0) {
            int status = 0;
            for (int i = 0; i < 50; ++i) {  // ~0.5s grace, then SIGKILL
                if (waitpid(pid_, &status, WNOHANG) != 0) return;
                usleep(10000);
            }
            kill(pid_, SIGKILL);
            waitpid(pid_, &status, 0);
        }
    }

    void write_line(const std::string& line) {
        std::string payload = line + "\n";
        size_t sent = 0;
        while (sent < payload.size()) {
            ssize_t n = write(in_fd_, payload.data() + sent, payload.size() - sent);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw GeneratorFailure("generator stdin closed (" +
                                       std::string(strerror(errno)) + ")");
            }
            sent += static_cast<size_t>(n);
        }
    }

    // Absent on clean EOF; throws on timeout.
    std::optional<std::string> read_line(double timeout_sec) {
        auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration<double>(timeout_sec);
        while (true) {
            size_t nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                return line;
            }
            auto remain = std::chrono::duration_cast<std::chrono::milliseconds>(
                              deadline - std::chrono::steady_clock::now())
                              .count();
            if (remain <= 0) throw GeneratorFailure("generator response timed out");
            pollfd pfd{out_fd_, POLLIN, 0};
            int pr = poll(&pfd, 1, static_cast<int>(std::min<long long>(remain, 200)));
            if (pr < 0 && errno != EINTR) throw GeneratorFailure("poll() failed");
            if (pr <= 0) continue;
            char chunk[4096];
            ssize_t n = read(out_fd_, chunk, sizeof(chunk));
            if (n < 0) {
                if (errno == EINTR) continue;
                throw GeneratorFailure("generator stdout read failed");
            }
            if (n == 0) {
                if (buffer_.empty()) return std::nullopt;
                std::string line = std::move(buffer_);
                buffer_.clear();
                return line;
            }
            buffer_.append(chunk, static_cast<size_t>(n));
        }
    }

    void close_stdin() {
        if (in_fd_ >= 0) {
            close(in_fd_);
            in_fd_ = -1;
        }
    }

private:
    pid_t pid_ = -1;
    int in_fd_ = -1;
    int out_fd_ = -1;
    std::string buffer_;
};

// Thread-safe request/response client over one generator process. Any number
// of threads may call request(); in-flight requests are capped by the handle's
// max_concurrent and responses are matched by id.
class GeneratorClient {
public:
    explicit GeneratorClient(GeneratorHandle handle)
        : handle_(std::move(handle)), proc_(handle_.command) {}

    std::string request(const std::string& kind, const std::string& input,
                        const GenerationHints& hints = {}) {
        {
            std::unique_lock lock(state_mu_);
            slots_cv_.wait(lock, [&] { return in_flight_ < handle_.max_concurrent; });
            ++in_flight_;
        }
        int id;
        try {
            nlohmann::json req{{"id", 0},
                               {"kind", kind},
                               {"input", input},
                               {"hints", {{"beam_size", hints.beam_size}, {"max_len", hints.max_len}}}};
            {
                std::lock_guard write_lock(write_mu_);
                id = next_id_++;
                req["id"] = id;
                proc_.write_line(req.dump());
            }
            std::string output = await(id);
            release_slot();
            return output;
        } catch (...) {
            release_slot();
            throw;
        }
    }

private:
    void release_slot() {
        std::lock_guard lock(state_mu_);
        --in_flight_;
        slots_cv_.notify_one();
    }

    std::string await(int id) {
        std::unique_lock lock(state_mu_);
        while (true) {
            if (!dead_reason_.empty()) throw GeneratorFailure(dead_reason_);
            if (auto it = outputs_.find(id); it != outputs_.end()) {
                if (!it->second.ok)
                    throw GeneratorFailure("generator error for request " + std::to_string(id) +
                                           ": " + it->second.text);
                std::string out = std::move(it->second.text);
                outputs_.erase(it);
                return out;
            }
            if (!reader_active_) {
                reader_active_ = true;
                lock.unlock();
                std::optional<std::string> line;
                std::string failure;
                try {
                    line = proc_.read_line(handle_.timeout_sec);
                } catch (const GeneratorFailure& e) {
                    failure = e.what();
                }
                lock.lock();
                reader_active_ = false;
                if (!failure.empty()) {
                    dead_reason_ = failure;
                } else if (!line) {
                    dead_reason_ = "generator exited before responding";
                } else {
                    ingest_line(*line);
                }
                resp_cv_.notify_all();
                continue;
            }
            resp_cv_.wait(lock);
        }
    }

    void ingest_line(const std::string& line) {
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("id") || !j.at("id").is_number_integer()) {
            dead_reason_ = "invalid generator response: " + line.substr(0, 200);
            return;
        }
        int id = j.at("id").get<int>();
        Response resp;
        if (j.contains("error") && !j.at("error").is_null()) {
            resp.ok = false;
            resp.text = j.at("error").is_string() ? j.at("error").get<std::string>() : j.at("error").dump();
        } else if (j.contains("output") && j.at("output").is_string()) {
            resp.ok = true;
            resp.text = j.at("output").get<std::string>();
        } else {
            dead_reason_ = "generator response missing output: " + line.substr(0, 200);
            return;
        }
        outputs_[id] = std::move(resp);
    }

    struct Response {
        bool ok = true;
        std::string text;
    };

    GeneratorHandle handle_;
    LineProcess proc_;
    std::mutex write_mu_;
    std::mutex state_mu_;
    std::condition_variable slots_cv_, resp_cv_;
    std::unordered_map<int, Response> outputs_;
    std::string dead_reason_;
    bool reader_active_ = false;
    int in_flight_ = 0;
    int next_id_ = 0;
};

// External classifier protocol: {"features":[...]} -> {"proba":p}.
class ExternalClassifierClient {
public:
    explicit ExternalClassifierClient(std::string command, double timeout_sec = 30.0)
        : timeout_sec_(timeout_sec), proc_(command) {}

    double predict_proba(const std::vector<double>& features) {
        std::lock_guard lock(mu_);
        nlohmann::json req{{"features", features}};
        proc_.write_line(req.dump());
        auto line = proc_.read_line(timeout_sec_);
        if (!line) throw GeneratorFailure("external classifier exited");
        nlohmann::json j = nlohmann::json::parse(*line, nullptr, false);
        if (j.is_discarded() || !j.contains("proba"))
            throw GeneratorFailure("invalid classifier response: " + line->substr(0, 200));
        double p = j.at("proba").get<double>();
        if (p < 0.0 || p > 1.0)
            throw GeneratorFailure("classifier probability out of range: " + std::to_string(p));
        return p;
    }

private:
    double timeout_sec_;
    std::mutex mu_;
    LineProcess proc_;
};

}  // namespace findsum
