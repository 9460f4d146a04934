//! Planted-community benchmark generator.
//!
//! Each group owns `users_per_group` users. A fraction of all users also
//! joins a second group. Every list belongs to one group: its size is drawn
//! uniformly from the size range, and each member comes from outside the
//! group with probability `noise`, otherwise from the group's pool. Within a
//! pool, users are drawn without replacement with Zipf-like popularity
//! weights `rank^-popularity` over a seeded shuffle of the pool, so a few
//! users appear on most of the group's lists. List names and descriptions mix the group's vocabulary with words shared by
//! every group.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{create, GroundTruth, ListRecord, MembershipCorpus};
use crate::error::{Error, Result};

const THEMES: &[&[&str]] = &[
    &["badminton", "shuttlers", "badders"],
    &["rowing", "rowers", "oarsmen"],
    &["fencing", "fencers", "sabre"],
    &["sailing", "sailors", "yachting"],
    &["cycling", "wielrennen", "ciclismo"],
    &["judo", "judoka", "tatami"],
    &["diving", "divers", "tuffi"],
    &["hockey", "sticks", "astroturf"],
    &["canoeing", "canoe", "slalom"],
    &["boxing", "boxers", "ringside"],
    &["gymnastics", "gymnasts", "vault"],
    &["archery", "archers", "bowmen"],
    &["triathlon", "triathletes", "ironman"],
    &["equestrian", "dressage", "showjumping"],
    &["swimming", "swimmers", "freestyle"],
    &["athletics", "sprinters", "hurdles"],
    &["weightlifting", "lifters", "barbell"],
    &["basketball", "hoops", "dunk"],
    &["waterpolo", "polo", "aquatics"],
    &["taekwondo", "kicks", "dojang"],
];

const SHARED_WORDS: &[&str] = &["olympic", "team", "london", "2012", "sport", "athletes", "news", "favourites"];

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSpec {
    pub groups: usize,
    pub users_per_group: usize,
    pub lists_per_group: usize,
    pub min_list_size: usize,
    pub max_list_size: usize,
    /// Probability that a list member is drawn from outside the list's group.
    pub noise: f64,
    /// Fraction of users that belong to a second group.
    pub overlap: f64,
    /// Zipf exponent of within-group user popularity; 0 samples uniformly.
    pub popularity: f64,
    /// Name vocabulary per group; generated when `None`.
    pub vocabulary: Option<Vec<Vec<String>>>,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        Self {
            groups: 8,
            users_per_group: 25,
            lists_per_group: 40,
            min_list_size: 5,
            max_list_size: 15,
            noise: 0.1,
            overlap: 0.1,
            popularity: 1.0,
            vocabulary: None,
        }
    }
}

impl PlantedSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Validation(m));
        if self.groups == 0 || self.users_per_group == 0 || self.lists_per_group == 0 {
            return fail("groups, users per group and lists per group must be positive".into());
        }
        if self.min_list_size == 0 || self.min_list_size > self.max_list_size {
            return fail(format!(
                "invalid list size range {}..={}",
                self.min_list_size, self.max_list_size
            ));
        }
        if self.max_list_size > self.users_per_group {
            return fail(format!(
                "list size {} exceeds the {} users of a group",
                self.max_list_size, self.users_per_group
            ));
        }
        if !(0.0..1.0).contains(&self.noise) {
            return fail(format!("noise must lie in [0, 1), got {}", self.noise));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return fail(format!("overlap must lie in [0, 1), got {}", self.overlap));
        }
        if !(self.popularity >= 0.0 && self.popularity.is_finite()) {
            return fail(format!("popularity must be a finite value >= 0, got {}", self.popularity));
        }
        if self.noise > 0.0 && self.groups < 2 {
            return fail("noise needs at least two groups".into());
        }
        if self.overlap > 0.0 && self.groups < 2 {
            return fail("overlap needs at least two groups".into());
        }
        if let Some(vocab) = &self.vocabulary {
            if vocab.len() < self.groups || vocab.iter().any(Vec::is_empty) {
                return fail("vocabulary needs a nonempty word list per group".into());
            }
        }
        Ok(())
    }

    fn vocabulary(&self) -> Vec<Vec<String>> {
        if let Some(v) = &self.vocabulary {
            return v.clone();
        }
        (0..self.groups)
            .map(|g| {
                let theme = THEMES[g % THEMES.len()];
                let round = g / THEMES.len();
                theme
                    .iter()
                    .map(|w| if round == 0 { w.to_string() } else { format!("{w}{round}") })
                    .collect()
            })
            .collect()
    }
}

/// A generated corpus with its planted structure.
#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub corpus: MembershipCorpus,
    /// Category per group, holding the group's full user pool.
    pub truth: GroundTruth,
    /// Group index of every list.
    pub list_groups: BTreeMap<String, usize>,
}

impl PlantedCorpus {
    pub fn group_name(group: usize) -> String {
        format!("group{group:02}")
    }

    /// List ids per group.
    pub fn lists_by_group(&self) -> Vec<Vec<String>> {
        let groups = self.list_groups.values().max().map_or(0, |g| g + 1);
        let mut out = vec![Vec::new(); groups];
        for (list, &g) in &self.list_groups {
            out[g].push(list.clone());
        }
        out
    }

    /// Write `memberships.tsv`, `lists.jsonl`, `groundtruth.tsv` and
    /// `planted_lists.tsv` (list id to group) into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        use std::io::Write;
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.corpus.write(&dir.join("memberships.tsv"), &dir.join("lists.jsonl"))?;
        self.truth.write(&dir.join("groundtruth.tsv"))?;
        let path = dir.join("planted_lists.tsv");
        let mut out = create(&path)?;
        for (list, &g) in &self.list_groups {
            writeln!(out, "{list}\t{}", Self::group_name(g)).map_err(|e| Error::io(&path, e))?;
        }
        out.flush().map_err(|e| Error::io(&path, e))
    }
}

fn user_id(group: usize, index: usize) -> String {
    format!("g{group:02}_u{index:03}")
}

fn list_text(rng: &mut ChaCha8Rng, words: &[String]) -> (String, String) {
    let primary = words.choose(rng).expect("nonempty vocabulary");
    let name = match rng.gen_range(0..3) {
        0 => primary.clone(),
        1 => format!("{primary} {}", SHARED_WORDS.choose(rng).unwrap()),
        _ => format!("{} {primary}", words.choose(rng).unwrap()),
    };
    let description = if rng.gen_bool(0.5) {
        format!("the best of {} {}", SHARED_WORDS.choose(rng).unwrap(), words.choose(rng).unwrap())
    } else {
        String::new()
    };
    (name, description)
}

/// Generate a planted corpus; deterministic in `seed`.
pub fn synth(spec: &PlantedSpec, seed: u64) -> Result<PlantedCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = spec.vocabulary();

    let mut pools: Vec<Vec<String>> = (0..spec.groups)
        .map(|g| (0..spec.users_per_group).map(|i| user_id(g, i)).collect())
        .collect();
    let all_users: Vec<(usize, String)> = (0..spec.groups)
        .flat_map(|g| (0..spec.users_per_group).map(move |i| (g, user_id(g, i))))
        .collect();
    let overlapping = (spec.overlap * all_users.len() as f64).round() as usize;
    for idx in rand::seq::index::sample(&mut rng, all_users.len(), overlapping).into_vec() {
        let (home, user) = &all_users[idx];
        let mut second = rng.gen_range(0..spec.groups - 1);
        if second >= *home {
            second += 1;
        }
        pools[second].push(user.clone());
    }

    let mut truth_rows = Vec::new();
    for (g, pool) in pools.iter().enumerate() {
        for u in pool {
            truth_rows.push((PlantedCorpus::group_name(g), u.clone()));
        }
    }

    let mut records = Vec::new();
    let mut rows = Vec::new();
    let mut list_groups = BTreeMap::new();
    for pool in &mut pools {
        pool.shuffle(&mut rng);
    }
    for (g, pool) in pools.iter().enumerate() {
        let weights: Vec<f64> = (1..=pool.len()).map(|rank| (rank as f64).powf(-spec.popularity)).collect();
        let members: BTreeSet<&str> = pool.iter().map(String::as_str).collect();
        let outsiders: Vec<&str> = all_users
            .iter()
            .map(|(_, u)| u.as_str())
            .filter(|u| !members.contains(u))
            .collect();
        for j in 0..spec.lists_per_group {
            let id = format!("g{g:02}_l{j:03}");
            let size = rng.gen_range(spec.min_list_size..=spec.max_list_size);
            let outside = (0..size).filter(|_| rng.gen_bool(spec.noise)).count().min(outsiders.len());
            let inside = size - outside;
            let picked = rand::seq::index::sample_weighted(&mut rng, pool.len(), |i| weights[i], inside)
                .expect("positive finite weights");
            for i in picked.into_vec() {
                rows.push((id.clone(), pool[i].clone()));
            }
            for i in rand::seq::index::sample(&mut rng, outsiders.len(), outside).into_vec() {
                rows.push((id.clone(), outsiders[i].to_string()));
            }
            let (name, description) = list_text(&mut rng, &vocab[g]);
            records.push(ListRecord::new(id.clone(), name, description));
            list_groups.insert(id, g);
        }
    }

    Ok(PlantedCorpus {
        corpus: MembershipCorpus::from_parts(records, rows)?,
        truth: GroundTruth::from_rows(truth_rows),
        list_groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_groups_do_not_mix() {
        let spec = PlantedSpec {
            groups: 2,
            noise: 0.0,
            overlap: 0.0,
            ..PlantedSpec::default()
        };
        let planted = synth(&spec, 1).unwrap();
        for (list, &g) in &planted.list_groups {
            let prefix = format!("g{g:02}_");
            assert!(planted.corpus.members(list).unwrap().iter().all(|u| u.starts_with(&prefix)));
        }
        assert_eq!(planted.corpus.list_count(), 80);
    }

    #[test]
    fn overlap_fraction_in_ground_truth() {
        let spec = PlantedSpec {
            overlap: 0.2,
            ..PlantedSpec::default()
        };
        let planted = synth(&spec, 3).unwrap();
        let mut memberships: BTreeMap<&str, usize> = BTreeMap::new();
        for users in planted.truth.categories.values() {
            for u in users {
                *memberships.entry(u.as_str()).or_insert(0) += 1;
            }
        }
        let doubles = memberships.values().filter(|&&c| c == 2).count();
        assert_eq!(memberships.len(), 200);
        assert_eq!(doubles, 40);
    }

    #[test]
    fn deterministic_in_seed() {
        let spec = PlantedSpec::default();
        let a = synth(&spec, 42).unwrap();
        let b = synth(&spec, 42).unwrap();
        assert_eq!(a.corpus, b.corpus);
        assert_eq!(a.truth, b.truth);
        assert_ne!(a.corpus, synth(&spec, 43).unwrap().corpus);
        assert_eq!(a.corpus.list_count(), 320);
    }

    #[test]
    fn infeasible_specs() {
        let too_big = PlantedSpec {
            max_list_size: 30,
            ..PlantedSpec::default()
        };
        assert!(matches!(synth(&too_big, 0), Err(Error::Validation(_))));
        let noisy_single = PlantedSpec {
            groups: 1,
            overlap: 0.0,
            ..PlantedSpec::default()
        };
        assert!(synth(&noisy_single, 0).is_err());
        assert!(synth(&PlantedSpec { noise: 1.0, ..PlantedSpec::default() }, 0).is_err());
    }
}
