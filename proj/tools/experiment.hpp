// SPDX-License-Identifier: Apache-2.0
//
// dcsit - error-rate, PEP and DMT toolkit for the two-user MISO broadcast channel with delayed CSIT
// Copyright (C) 2026 The dcsit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dcsit::experiment
{
    // Plain key = value settings. Keys are validated when an experiment is prepared.
    using ConfigMap = std::map<std::string, std::string>;

    // Reads "key = value" lines; '#' starts a comment
    ConfigMap parse_config(const std::string &text);

    // Sorted "key = value" lines without the keys that do not affect results (threads, out)
    std::string canonical_text(const ConfigMap &cfg);

    // Real number with optional fraction and pi factor: "1.5", "4/3", "pi/2", "3pi/4"
    double parse_real(const std::string &s);

    // "start:stop:step" or comma list, in dB
    std::vector<double> parse_grid(const std::string &s);

    // Names accepted by `run` and by the "experiment" key
    const std::vector<std::string> &experiment_names();

    // Defaults of an experiment or figure preset, merged under the user's keys
    ConfigMap resolve(const ConfigMap &user);

    struct Artifact
    {
        std::string file;
        std::string content;
    };

    struct Report
    {
        std::vector<std::string> notes;
        std::vector<std::string> violations;
        bool ok() const { return violations.empty(); }
        std::string str() const;
    };

    // Dry run: rate/constellation consistency, power bookkeeping, codebook memory
    Report validate(const ConfigMap &user);

    // Runs the experiment in memory; throws std::invalid_argument on bad settings
    std::vector<Artifact> run(const ConfigMap &user);

    // Manifest JSON for a finished run; lists the canonical config, its git blob hash and output hashes
    Artifact manifest(const ConfigMap &user, const std::vector<Artifact> &outputs);

    // Config stored in a manifest; throws std::runtime_error when a recorded input file changed
    ConfigMap config_from_manifest(const std::string &json_text);

    // Writes every artifact to dir through a temporary file and rename
    void write_artifacts(const std::string &dir, const std::vector<Artifact> &files);

    // SHA-1 of "blob <size>\0<content>", as git computes it
    std::string git_blob_sha1(const std::string &content);

} // namespace dcsit::experiment
