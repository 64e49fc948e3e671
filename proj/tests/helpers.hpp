#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "footprint/corpus.hpp"
#include "footprint/time.hpp"

namespace testutil {

// Fresh directory under the system temp root, unique per call.
inline std::string temp_dir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    namespace fs = std::filesystem;
    fs::path p = fs::temp_directory_path() /
                 (tag + "_" + std::to_string(::getpid()) + "_" +
                  std::to_string(counter.fetch_add(1)));
    fs::create_directories(p);
    return p.string();
}

inline std::string write_file(const std::string& dir, const std::string& name,
                              const std::string& content) {
    std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline footprint::TweetRecord tweet(const std::string& account, footprint::UtcTime ts,
                                    const std::string& text) {
    footprint::TweetRecord t;
    t.account_id = account;
    t.timestamp = ts;
    t.text = text;
    t.hashtags = footprint::extract_hashtags(text);
    t.mentions = footprint::extract_mentions(text);
    t.language_tag = "en";
    return t;
}

}  // namespace testutil
