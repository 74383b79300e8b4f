use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_alias-census");

const FIXTURE: &str = "\
alias g=git
alias gs='git status'
alias gp='git push'
alias gl='git log --oneline'
alias ll='ls -l'
alias la='ls -a'
alias l='ls -CF'
alias grep='grep --color=auto'
alias dl='cd ~/Downloads'
alias update='sudo apt-get update && sudo apt-get upgrade'
alias ports='netstat -tulpn | grep LISTEN'
";

struct Env {
    dir: tempfile::TempDir,
}

impl Env {
    fn new() -> Env {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("dots")).unwrap();
        fs::write(dir.path().join("dots/.bash_aliases"), FIXTURE).unwrap();
        fs::write(dir.path().join("dots/notes.txt"), "alias nope=never\n").unwrap();
        Env { dir }
    }

    fn path(&self, p: &str) -> PathBuf {
        self.dir.path().join(p)
    }

    fn store(&self) -> PathBuf {
        self.path("store.jsonl")
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(BIN)
            .args(args)
            .current_dir(self.dir.path())
            .env_remove("ALIAS_CENSUS_CONFIG")
            .env("HOME", self.dir.path())
            .env("XDG_CONFIG_HOME", self.dir.path().join("xdg"))
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert!(
            out.status.success(),
            "{args:?} failed with {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    }

    fn scanned() -> Env {
        let env = Env::new();
        let store = env.store();
        env.ok(&["scan", "dots", "--store", store.to_str().unwrap()]);
        env
    }

    fn store_arg(&self) -> String {
        self.store().to_str().unwrap().to_string()
    }
}

fn code(out: &Output) -> Option<i32> {
    out.status.code()
}

#[test]
fn no_arguments_prints_usage_and_fails() {
    let out = Env::new().run(&[]);
    assert_eq!(code(&out), Some(1));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage:"));
}

#[test]
fn unknown_subcommand_or_flag_is_a_user_error() {
    let env = Env::new();
    for args in [&["frobnicate"][..], &["stats", "--nope", "top-names"], &["stats", "no-such-table"]] {
        let out = env.run(args);
        assert_eq!(code(&out), Some(1), "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(code(&env.run(&["--help"])), Some(0));
}

#[test]
fn scan_reports_and_respects_name_patterns() {
    let env = Env::new();
    let s = env.store_arg();
    let out = env.ok(&["scan", "dots", "--store", &s]);
    let mut lines = out.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let get = |k: &str| row[header.iter().position(|h| *h == k).unwrap()];
    assert_eq!(get("files_ingested"), "1");
    assert_eq!(get("aliases_parsed"), "11");
    // the same bytes again are all duplicates
    let again = env.ok(&["scan", "dots", "--store", &s, "--json"]);
    let v: serde_json::Value = serde_json::from_str(&again).unwrap();
    assert_eq!(v["duplicates_dropped"], 1);
    assert_eq!(v["files_ingested"], 0);
    let all = env.ok(&["scan", "dots", "--all", "--store", &s, "--json"]);
    let v: serde_json::Value = serde_json::from_str(&all).unwrap();
    assert_eq!(v["files_ingested"], 1);
}

#[test]
fn top_commands_hand_counts() {
    let env = Env::scanned();
    let out = env.ok(&["stats", "top-commands", "--top", "5", "--store", &env.store_arg()]);
    // 13 commands: git 4, ls 3, apt-get 2, grep 2, cd 1, netstat 1
    assert_eq!(
        out,
        "rank,token,count,percent\n\
         1,git,4,30.77\n\
         2,ls,3,23.08\n\
         3,apt-get,2,15.38\n\
         4,grep,2,15.38\n\
         5,cd,1,7.69\n"
    );
}

#[test]
fn classify_then_practices_matrix() {
    let env = Env::scanned();
    let s = env.store_arg();
    let out = env.ok(&["classify", "--store", &s, "--json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["aliases"], 11);
    let out = env.ok(&["stats", "practices", "--store", &s, "--top", "3"]);
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "command,aliases,Nicknaming,AbbreviatingSubcommands,BookmarkingLocations,SubstitutingCommands,\
         OverridingDefaults,ColorizingOutput,ElevatingPrivilege,TransformingData,ChainingSubcommands,compression_median"
    );
    let git = lines.next().unwrap();
    // g is a nickname; gs, gp abbreviate subcommands; gl carries a flag too
    assert!(git.starts_with("git,4,25.00,50.00,"), "{git}");
    assert_eq!(out.lines().count(), 4);
}

#[test]
fn every_stats_table_is_deterministic() {
    let env = Env::scanned();
    let s = env.store_arg();
    let tables = [
        vec!["top-names"],
        vec!["top-commands"],
        vec!["top-arguments"],
        vec!["breakdown", "--command", "git"],
        vec!["compression"],
        vec!["flows", "--length", "2", "--min-share", "0"],
        vec!["provenance-files"],
        vec!["provenance-words"],
        vec!["practices"],
        vec!["practice-summary"],
        vec!["sample", "--long-tail", "3"],
    ];
    for t in tables {
        for json in [false, true] {
            let mut args = vec!["stats"];
            args.extend(t.iter().copied());
            args.extend(["--store", &s, "--seed", "9"]);
            if json {
                args.push("--json");
            }
            let a = env.ok(&args);
            let b = env.ok(&args);
            assert_eq!(a, b, "{args:?}");
            // CSV always has a header; JSON lines may be empty
            assert!(json || !a.is_empty(), "{args:?}");
        }
    }
}

#[test]
fn missing_store_is_a_user_error() {
    let env = Env::new();
    let out = env.run(&["stats", "top-names", "--store", "absent.jsonl"]);
    assert_eq!(code(&out), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no store"));
}

#[test]
fn unwritable_store_is_an_internal_error() {
    let env = Env::new();
    let out = env.run(&["scan", "dots", "--store", "/proc/no-such-dir/store.jsonl"]);
    assert_eq!(code(&out), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_file_sets_defaults_and_flags_override() {
    let env = Env::new();
    fs::create_dir_all(env.path("xdg/alias-census")).unwrap();
    fs::write(env.path("xdg/alias-census/config"), "# test\nstore = from-config.jsonl\njson = true\n").unwrap();
    let out = env.ok(&["scan", "dots"]);
    assert!(out.starts_with('{'), "{out}");
    assert!(env.path("from-config.jsonl").exists());
    env.ok(&["scan", "dots", "--store", "flag.jsonl"]);
    assert!(env.path("flag.jsonl").exists());

    let explicit = env.path("other.conf");
    fs::write(&explicit, "store = other.jsonl\n").unwrap();
    let out = env.ok(&["scan", "dots", "--config", explicit.to_str().unwrap()]);
    assert!(out.starts_with("files_seen,"), "{out}");
    assert!(env.path("other.jsonl").exists());

    fs::write(&explicit, "colour = blue\n").unwrap();
    let out = env.run(&["scan", "dots", "--config", explicit.to_str().unwrap()]);
    assert_eq!(code(&out), Some(1));
}

#[test]
fn export_import_round_trip() {
    let env = Env::scanned();
    let s = env.store_arg();
    let dump = env.path("dump.jsonl");
    env.ok(&["export", "store", "-o", dump.to_str().unwrap(), "--store", &s]);
    let copy = env.path("copy.jsonl");
    let out = env.ok(&["import", dump.to_str().unwrap(), "--store", copy.to_str().unwrap()]);
    assert!(out.contains("11"), "{out}");
    for table in ["repos", "files", "aliases", "commands", "arguments", "labels"] {
        for format in ["jsonl", "csv"] {
            let a = env.ok(&["export", table, "--format", format, "--store", &s]);
            let b = env.ok(&["export", table, "--format", format, "--store", copy.to_str().unwrap()]);
            assert_eq!(a, b, "{table} {format}");
        }
    }
    // importing into a non-empty store is refused
    let out = env.run(&["import", dump.to_str().unwrap(), "--store", &s]);
    assert_eq!(code(&out), Some(1));
    let out = env.run(&["export", "nope", "--store", &s]);
    assert_eq!(code(&out), Some(1));
}

#[test]
fn suggest_build_and_fix() {
    let env = Env::new();
    let mut src = String::new();
    for i in 0..6 {
        src.push_str(&format!("alias in{i}='sudo apt-get install pkg{i}'\n"));
    }
    fs::write(env.path("dots/.bash_aliases"), src).unwrap();
    let s = env.store_arg();
    env.ok(&["scan", "dots", "--store", &s]);
    let out = env.ok(&["suggest", "build", "--store", &s, "--json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["sudo_rules"].as_u64().unwrap() >= 1);
    assert!(env.path("rules.jsonl").exists());
    let out = env.ok(&["suggest", "fix", "--store", &s, "apt-get install vim"]);
    let second = out.lines().nth(1).unwrap();
    assert!(second.starts_with("1,sudo apt-get install vim,sudo-prefix,1.000000,6,"), "{out}");
    let words = env.ok(&["suggest", "fix", "--store", &s, "--", "apt-get", "install", "vim"]);
    assert_eq!(out, words);
    let out = env.run(&["suggest", "fix", "--store", &s, "echo 'open"]);
    assert_eq!(code(&out), Some(1));
}

#[test]
fn harvest_plan_and_run_on_the_simulator() {
    let env = Env::new();
    let plan = env.ok(&[
        "harvest", "plan", "--max-size", "2000", "--sim-files", "3000", "--sim-dense", "601..700:2500", "--json",
    ]);
    let p: serde_json::Value = serde_json::from_str(&plan).unwrap();
    let ranges = p["ranges"].as_array().unwrap();
    assert!(ranges.len() > 20, "dense range was not split");
    let plan_file = env.path("plan.json");
    fs::write(&plan_file, &plan).unwrap();
    let out_file = env.path("harvest.jsonl");
    let s = env.store_arg();
    let report = env.ok(&[
        "harvest",
        "run",
        "--max-size",
        "2000",
        "--sim-files",
        "3000",
        "--sim-dense",
        "601..700:2500",
        "--plan",
        plan_file.to_str().unwrap(),
        "-o",
        out_file.to_str().unwrap(),
        "--ingest",
        "--store",
        &s,
        "--json",
    ]);
    let r: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(r["estimated_population"], 3000);
    assert_eq!(r["coverage"], 1.0);
    let lines = fs::read_to_string(&out_file).unwrap().lines().count();
    assert_eq!(lines, 3000);
    let words = env.ok(&["stats", "top-names", "--top", "1", "--store", &s]);
    assert!(words.lines().count() == 2);
    assert!(Path::new(&s).exists());
    let out = env.run(&["harvest", "run", "--sim-dense", "junk", "-o", "x.jsonl"]);
    assert_eq!(code(&out), Some(1));
}
