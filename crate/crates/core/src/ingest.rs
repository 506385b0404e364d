//! Readers for MovieLens-family files and the canonical tab-separated format.
//!
//! Every reader maps string ids onto dense indices in first-seen order through
//! an [`IdMap`], so a test file parsed with the maps built from the training
//! file lands in the same index space.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use log::warn;

use crate::error::{CfnError, Result};
use crate::ratings::{Orientation, RatingScale, SparseRatings};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    /// `::`-separated (`ratings.dat`, `movies.dat`, `tags.dat`, `users.dat`).
    MovieLensDat,
    /// Comma-separated with a header row (`ratings.csv`, `movies.csv`, `tags.csv`).
    MovieLensCsv,
    /// Tab-separated, no header.
    Canonical,
}

impl FileFormat {
    /// Guesses from the file extension: `.dat`, `.csv`, anything else is canonical.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("dat") => FileFormat::MovieLensDat,
            Some("csv") => FileFormat::MovieLensCsv,
            _ => FileFormat::Canonical,
        }
    }
}

impl FromStr for FileFormat {
    type Err = CfnError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "movielens-dat" | "dat" => Ok(FileFormat::MovieLensDat),
            "movielens-csv" | "csv" => Ok(FileFormat::MovieLensCsv),
            "canonical" | "tsv" => Ok(FileFormat::Canonical),
            other => Err(CfnError::Config(format!("unknown file format `{other}`"))),
        }
    }
}

/// Injective map from string ids to dense indices, in first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdMap {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl IdMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id(&self, index: usize) -> Option<&str> {
        self.ids.get(index).map(String::as_str)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Returns the index of `id`, inserting it if unseen.
    pub fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), i);
        i
    }

    /// Sidecar file: `entity<TAB>index` per line.
    pub fn write(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| CfnError::io(path, e))?;
        let mut w = BufWriter::new(file);
        for (i, id) in self.ids.iter().enumerate() {
            writeln!(w, "{id}\t{i}").map_err(|e| CfnError::io(path, e))?;
        }
        w.flush().map_err(|e| CfnError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut pairs = Vec::new();
        for_each_line(path, |line_no, line| {
            let (id, idx) = line
                .split_once('\t')
                .ok_or_else(|| CfnError::parse(path, line_no, "expected `entity<TAB>index`"))?;
            let idx: usize = idx
                .trim()
                .parse()
                .map_err(|_| CfnError::parse(path, line_no, format!("bad index `{idx}`")))?;
            pairs.push((idx, id.to_string()));
            Ok(())
        })?;
        pairs.sort();
        let mut map = IdMap::new();
        for (expected, (idx, id)) in pairs.into_iter().enumerate() {
            if idx != expected {
                return Err(CfnError::parse(path, expected + 1, "indices must be dense 0..n"));
            }
            if map.get(&id).is_some() {
                return Err(CfnError::parse(path, expected + 1, format!("duplicate entity `{id}`")));
            }
            map.intern(&id);
        }
        Ok(map)
    }
}

/// A parsed rating file: user-row matrix in original units plus its id spaces.
#[derive(Debug, Clone)]
pub struct RatingsData {
    pub ratings: SparseRatings,
    pub users: IdMap,
    pub items: IdMap,
    pub scale: RatingScale,
}

/// Calls `f(line_number, line)` for every non-blank line (1-based numbering).
fn for_each_line(path: &Path, mut f: impl FnMut(usize, &str) -> Result<()>) -> Result<usize> {
    let file = File::open(path).map_err(|e| CfnError::io(path, e))?;
    let reader = BufReader::new(file);
    let mut seen = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CfnError::io(path, e))?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        seen += 1;
        f(i + 1, line)?;
    }
    Ok(seen)
}

/// Yields `(line_number, fields)` for every record of a file in `format`.
///
/// For CSV the header row is skipped and line numbers count it.
fn for_each_record(
    path: &Path,
    format: FileFormat,
    mut f: impl FnMut(usize, &[&str]) -> Result<()>,
) -> Result<usize> {
    match format {
        FileFormat::MovieLensDat => for_each_line(path, |n, line| {
            let fields: Vec<&str> = line.split("::").collect();
            f(n, &fields)
        }),
        FileFormat::Canonical => for_each_line(path, |n, line| {
            let fields: Vec<&str> = line.split('\t').collect();
            f(n, &fields)
        }),
        FileFormat::MovieLensCsv => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(true)
                .flexible(true)
                .from_path(path)
                .map_err(|e| csv_error(path, e))?;
            let mut seen = 0;
            let mut record = csv::StringRecord::new();
            loop {
                match reader.read_record(&mut record) {
                    Ok(false) => break,
                    Ok(true) => {
                        let line = record.position().map_or(0, |p| p.line() as usize);
                        let fields: Vec<&str> = record.iter().collect();
                        if fields.iter().all(|s| s.trim().is_empty()) {
                            continue;
                        }
                        seen += 1;
                        f(line, &fields)?;
                    }
                    Err(e) => return Err(csv_error(path, e)),
                }
            }
            Ok(seen)
        }
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CfnError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CfnError::io(path, io),
        other => CfnError::parse(path, line, format!("{other:?}")),
    }
}

/// Parses rating triplets, interning ids into the given maps.
pub fn parse_rating_triplets(
    path: &Path,
    format: FileFormat,
    users: &mut IdMap,
    items: &mut IdMap,
) -> Result<Vec<(usize, usize, f64)>> {
    let mut triplets = Vec::new();
    let n = for_each_record(path, format, |line, fields| {
        if fields.len() < 3 {
            return Err(CfnError::parse(
                path,
                line,
                format!("expected at least 3 fields, found {}", fields.len()),
            ));
        }
        let value: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| CfnError::parse(path, line, format!("bad rating `{}`", fields[2])))?;
        if !value.is_finite() {
            return Err(CfnError::parse(path, line, "rating is not finite"));
        }
        let u = users.intern(fields[0].trim());
        let i = items.intern(fields[1].trim());
        triplets.push((u, i, value));
        Ok(())
    })?;
    if n == 0 {
        return Err(CfnError::EmptyInput(path.display().to_string()));
    }
    Ok(triplets)
}

/// Scale implied by the observed values: 1..5 stars, 0.5..5 half stars, else the observed range.
pub fn infer_scale(values: impl IntoIterator<Item = f64>) -> Result<RatingScale> {
    let (mut lo, mut hi, mut integral) = (f64::INFINITY, f64::NEG_INFINITY, true);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
        integral &= v.fract() == 0.0;
    }
    if lo >= 1.0 && hi <= 5.0 && integral {
        Ok(RatingScale::one_to_five())
    } else if lo >= 0.5 && hi <= 5.0 {
        Ok(RatingScale::half_to_five())
    } else {
        RatingScale::new(lo, hi)
    }
}

/// Reads a rating file into a user-row matrix.
///
/// With `scale = None` the range is inferred from the values (see [`infer_scale`]).
pub fn parse_ratings(
    path: &Path,
    format: FileFormat,
    scale: Option<RatingScale>,
) -> Result<RatingsData> {
    let mut users = IdMap::new();
    let mut items = IdMap::new();
    let triplets = parse_rating_triplets(path, format, &mut users, &mut items)?;
    let scale = match scale {
        Some(s) => s,
        None => infer_scale(triplets.iter().map(|t| t.2))?,
    };
    let ratings =
        SparseRatings::from_triplets(users.len(), items.len(), Orientation::UserRows, &triplets)?;
    Ok(RatingsData {
        ratings,
        users,
        items,
        scale,
    })
}

/// Writes `user_id<TAB>item_id<TAB>rating` for every entry of a user-row matrix.
pub fn write_canonical(
    path: &Path,
    ratings: &SparseRatings,
    users: &IdMap,
    items: &IdMap,
) -> Result<()> {
    let (row_ids, col_ids) = match ratings.orientation() {
        Orientation::UserRows => (users, items),
        Orientation::ItemRows => (items, users),
    };
    let file = File::create(path).map_err(|e| CfnError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (r, c, v) in ratings.iter() {
        let rid = row_ids
            .id(r)
            .ok_or_else(|| CfnError::OutOfRange(format!("row {r} has no id")))?;
        let cid = col_ids
            .id(c)
            .ok_or_else(|| CfnError::OutOfRange(format!("column {c} has no id")))?;
        let (uid, iid) = match ratings.orientation() {
            Orientation::UserRows => (rid, cid),
            Orientation::ItemRows => (cid, rid),
        };
        writeln!(w, "{uid}\t{iid}\t{v}").map_err(|e| CfnError::io(path, e))?;
    }
    w.flush().map_err(|e| CfnError::io(path, e))
}

/// Occurrence counts of free-text tags per entity (items for MovieLens, users for relations).
#[derive(Debug, Clone, PartialEq)]
pub struct TagMatrix {
    /// Rows are entities, columns are tags, values are non-negative counts.
    pub counts: SparseRatings,
    pub tags: IdMap,
}

impl TagMatrix {
    pub fn n_entities(&self) -> usize {
        self.counts.n_rows()
    }

    pub fn n_tags(&self) -> usize {
        self.counts.n_cols()
    }

    /// Builds from accumulated `(entity, tag)` counts; `n_entities` may exceed the largest row seen.
    fn from_counts(
        n_entities: usize,
        tags: IdMap,
        counts: HashMap<(usize, usize), u64>,
    ) -> Result<Self> {
        let triplets: Vec<_> = counts
            .into_iter()
            .map(|((e, t), c)| (e, t, c as f64))
            .collect();
        let counts =
            SparseRatings::from_triplets(n_entities, tags.len(), Orientation::ItemRows, &triplets)?;
        Ok(TagMatrix { counts, tags })
    }

    /// Dense row-major copy, `n_entities x n_tags`.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n_entities())
            .map(|r| self.counts.row(r).to_dense(self.n_tags()))
            .collect()
    }
}

fn normalize_tag(tag: &str) -> String {
    tag.trim().to_lowercase()
}

/// Reads item tags: `user::item::tag::ts` (dat), `userId,movieId,tag,ts` (csv)
/// or `item<TAB>tag` (canonical). Tags are trimmed and lower-cased before counting.
pub fn parse_tags(path: &Path, format: FileFormat, items: &mut IdMap) -> Result<TagMatrix> {
    let before = items.len();
    let mut tags = IdMap::new();
    let mut counts: HashMap<(usize, usize), u64> = HashMap::new();
    let n = for_each_record(path, format, |line, fields| {
        let (item, tag) = match format {
            FileFormat::Canonical if fields.len() >= 2 => (fields[0], fields[1..].join("\t")),
            FileFormat::MovieLensDat if fields.len() >= 3 => (fields[1], fields[2].to_string()),
            FileFormat::MovieLensCsv if fields.len() >= 3 => (fields[1], fields[2].to_string()),
            _ => return Err(CfnError::parse(path, line, "too few fields for a tag record")),
        };
        let tag = normalize_tag(&tag);
        if tag.is_empty() {
            return Ok(());
        }
        let e = items.intern(item.trim());
        let t = tags.intern(&tag);
        *counts.entry((e, t)).or_default() += 1;
        Ok(())
    })?;
    if n == 0 {
        return Err(CfnError::EmptyInput(path.display().to_string()));
    }
    if items.len() > before {
        warn!(
            "{}: {} entities unseen in the ratings were added",
            path.display(),
            items.len() - before
        );
    }
    TagMatrix::from_counts(items.len(), tags, counts)
}

/// Reads symmetric entity relations (`a<TAB>b` per line, e.g. user/friend) as a tag matrix
/// whose columns are the related entities' ids.
pub fn parse_relations(path: &Path, entities: &mut IdMap) -> Result<TagMatrix> {
    let before = entities.len();
    let mut tags = IdMap::new();
    let mut counts: HashMap<(usize, usize), u64> = HashMap::new();
    let n = for_each_record(path, FileFormat::Canonical, |line, fields| {
        if fields.len() < 2 {
            return Err(CfnError::parse(path, line, "expected `a<TAB>b`"));
        }
        let (a, b) = (fields[0].trim(), fields[1].trim());
        for (src, dst) in [(a, b), (b, a)] {
            let e = entities.intern(src);
            let t = tags.intern(dst);
            *counts.entry((e, t)).or_default() += 1;
        }
        Ok(())
    })?;
    if n == 0 {
        return Err(CfnError::EmptyInput(path.display().to_string()));
    }
    if entities.len() > before {
        warn!(
            "{}: {} entities unseen in the ratings were added",
            path.display(),
            entities.len() - before
        );
    }
    TagMatrix::from_counts(entities.len(), tags, counts)
}

/// Binary entity-by-category indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryMatrix {
    pub categories: Vec<String>,
    /// For each entity, the sorted category columns set to 1.
    pub members: Vec<Vec<usize>>,
}

impl CategoryMatrix {
    pub fn n_entities(&self) -> usize {
        self.members.len()
    }

    pub fn n_categories(&self) -> usize {
        self.categories.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.members
            .iter()
            .map(|m| {
                let mut row = vec![0.0; self.n_categories()];
                for &c in m {
                    row[c] = 1.0;
                }
                row
            })
            .collect()
    }
}

/// Reads `item::title::A|B` (dat), `movieId,title,A|B` (csv) or `item<TAB>A|B` (canonical).
pub fn parse_categories(path: &Path, format: FileFormat, items: &mut IdMap) -> Result<CategoryMatrix> {
    let before = items.len();
    let mut categories = IdMap::new();
    let mut members: HashMap<usize, Vec<usize>> = HashMap::new();
    let n = for_each_record(path, format, |line, fields| {
        if fields.len() < 2 {
            return Err(CfnError::parse(path, line, "too few fields for a category record"));
        }
        let item = fields[0].trim();
        let genres = fields[fields.len() - 1].trim();
        let e = items.intern(item);
        let set = members.entry(e).or_default();
        for g in genres.split('|').map(str::trim) {
            if g.is_empty() || g == "(no genres listed)" {
                continue;
            }
            let c = categories.intern(g);
            if !set.contains(&c) {
                set.push(c);
            }
        }
        Ok(())
    })?;
    if n == 0 {
        return Err(CfnError::EmptyInput(path.display().to_string()));
    }
    if items.len() > before {
        warn!(
            "{}: {} entities unseen in the ratings were added",
            path.display(),
            items.len() - before
        );
    }
    let mut rows = vec![Vec::new(); items.len()];
    for (e, mut set) in members {
        set.sort_unstable();
        rows[e] = set;
    }
    Ok(CategoryMatrix {
        categories: categories.ids().to_vec(),
        members: rows,
    })
}

/// Raw per-user demographic fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Demographics {
    /// Indexed by user; `None` for users absent from the file.
    pub records: Vec<Option<DemographicRecord>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemographicRecord {
    pub gender: String,
    pub age: f64,
    pub occupation: String,
}

/// Reads `user::gender::age::occupation::zip` (MovieLens-1M `users.dat`) or the same
/// fields tab-separated.
pub fn parse_demographics(path: &Path, format: FileFormat, users: &mut IdMap) -> Result<Demographics> {
    let before = users.len();
    let mut parsed = Vec::new();
    let n = for_each_record(path, format, |line, fields| {
        if fields.len() < 4 {
            return Err(CfnError::parse(path, line, "expected user, gender, age, occupation"));
        }
        let age: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| CfnError::parse(path, line, format!("bad age `{}`", fields[2])))?;
        let u = users.intern(fields[0].trim());
        parsed.push((
            u,
            DemographicRecord {
                gender: fields[1].trim().to_string(),
                age,
                occupation: fields[3].trim().to_string(),
            },
        ));
        Ok(())
    })?;
    if n == 0 {
        return Err(CfnError::EmptyInput(path.display().to_string()));
    }
    if users.len() > before {
        warn!(
            "{}: {} users unseen in the ratings were added",
            path.display(),
            users.len() - before
        );
    }
    let mut records = vec![None; users.len()];
    for (u, rec) in parsed {
        records[u] = Some(rec);
    }
    Ok(Demographics { records })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file_with(name: &str, contents: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(name);
        let mut f = File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        (dir, path)
    }

    #[test]
    fn parses_movielens_dat_line() {
        let (_d, p) = file_with("ratings.dat", "1::1193::5::978300760\n1::661::3::978302109\n");
        let data = parse_ratings(&p, FileFormat::MovieLensDat, None).unwrap();
        assert_eq!(data.users.id(0), Some("1"));
        assert_eq!(data.items.id(0), Some("1193"));
        assert_eq!(data.ratings.get(0, 0), Some(5.0));
        assert_eq!(data.scale, RatingScale::one_to_five());
    }

    #[test]
    fn parses_csv_with_header_and_half_stars() {
        let (_d, p) = file_with(
            "ratings.csv",
            "userId,movieId,rating,timestamp\n1,2,3.5,1112486027\n1,29,3.5,1112484676\n2,2,1.0,0\n",
        );
        let data = parse_ratings(&p, FileFormat::MovieLensCsv, None).unwrap();
        assert_eq!(data.ratings.nnz(), 3);
        assert_eq!(data.scale, RatingScale::half_to_five());
        assert_eq!(data.ratings.get(1, 0), Some(1.0));
    }

    #[test]
    fn empty_file_is_an_error() {
        let (_d, p) = file_with("empty.tsv", "");
        assert!(matches!(
            parse_ratings(&p, FileFormat::Canonical, None),
            Err(CfnError::EmptyInput(_))
        ));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let (_d, p) = file_with("r.tsv", "a\tb\t4\na\tc\n");
        match parse_ratings(&p, FileFormat::Canonical, None) {
            Err(CfnError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let (_d, p) = file_with("r.tsv", "a\tb\tfour\n");
        assert!(matches!(
            parse_ratings(&p, FileFormat::Canonical, None),
            Err(CfnError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn canonical_round_trip() {
        let (dir, p) = file_with("r.tsv", "u1\ti1\t4\nu2\ti1\t2.5\nu1\ti9\t0.123456\n");
        let data = parse_ratings(&p, FileFormat::Canonical, None).unwrap();
        let out = dir.path().join("out.tsv");
        write_canonical(&out, &data.ratings, &data.users, &data.items).unwrap();
        let again = parse_ratings(&out, FileFormat::Canonical, None).unwrap();
        assert_eq!(again.ratings, data.ratings);
        assert_eq!(again.users, data.users);
        assert_eq!(again.items, data.items);
    }

    #[test]
    fn id_map_sidecar_round_trip() {
        let mut m = IdMap::new();
        for id in ["7", "x y", "3"] {
            m.intern(id);
        }
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("users.map");
        m.write(&p).unwrap();
        assert_eq!(IdMap::read(&p).unwrap(), m);
    }

    #[test]
    fn tags_accumulate_and_normalize() {
        let (_d, p) = file_with(
            "tags.dat",
            "15::4973::excellent!::1215184630\n20::4973::Funny ::1\n21::4973::funny::2\n",
        );
        let mut items = IdMap::new();
        items.intern("4973");
        let t = parse_tags(&p, FileFormat::MovieLensDat, &mut items).unwrap();
        assert_eq!(t.n_tags(), 2);
        let funny = t.tags.get("funny").unwrap();
        assert_eq!(t.counts.get(0, funny), Some(2.0));
    }

    #[test]
    fn tags_hand_tally() {
        // items a, b, c; tags x, y, z, w
        let (_d, p) = file_with(
            "tags.tsv",
            "a\tx\na\ty\nb\tX\nb\tx\nb\tz\nc\tw\nc\tw\nc\ty\na\tx\n",
        );
        let mut items = IdMap::new();
        let t = parse_tags(&p, FileFormat::Canonical, &mut items).unwrap();
        assert_eq!((t.n_entities(), t.n_tags()), (3, 4));
        // columns in first-seen order: x, y, z, w
        let expected = vec![
            vec![2.0, 1.0, 0.0, 0.0],
            vec![2.0, 0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0, 2.0],
        ];
        assert_eq!(t.to_dense(), expected);
    }

    #[test]
    fn unseen_tag_items_add_rows() {
        let (_d, p) = file_with("tags.tsv", "known\tx\nnew\ty\n");
        let mut items = IdMap::new();
        items.intern("known");
        let t = parse_tags(&p, FileFormat::Canonical, &mut items).unwrap();
        assert_eq!(items.len(), 2);
        assert_eq!(t.n_entities(), 2);
    }

    #[test]
    fn categories_examples() {
        let (_d, p) = file_with(
            "movies.dat",
            "1::Heat (1995)::Action|Thriller\n2::Nothing::\n3::Toy Story (1995)::Animation|Comedy\n\
             4::Ronin (1998)::Action|Crime|Thriller\n5::Babe (1995)::Comedy\n",
        );
        let mut items = IdMap::new();
        let c = parse_categories(&p, FileFormat::MovieLensDat, &mut items).unwrap();
        assert_eq!(c.categories, vec!["Action", "Thriller", "Animation", "Comedy", "Crime"]);
        let expected = vec![
            vec![1.0, 1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0, 0.0, 1.0],
            vec![0.0, 0.0, 0.0, 1.0, 0.0],
        ];
        assert_eq!(c.to_dense(), expected);
    }

    #[test]
    fn categories_csv_with_quoted_title() {
        let (_d, p) = file_with(
            "movies.csv",
            "movieId,title,genres\n11,\"American President, The (1995)\",Comedy|Drama\n12,X,(no genres listed)\n",
        );
        let mut items = IdMap::new();
        let c = parse_categories(&p, FileFormat::MovieLensCsv, &mut items).unwrap();
        assert_eq!(c.categories, vec!["Comedy", "Drama"]);
        assert_eq!(c.members, vec![vec![0, 1], vec![]]);
    }

    #[test]
    fn relations_are_symmetric() {
        let (_d, p) = file_with("friends.tsv", "u1\tu2\nu2\tu3\n");
        let mut users = IdMap::new();
        let t = parse_relations(&p, &mut users).unwrap();
        assert_eq!(t.n_entities(), 3);
        let u2 = users.get("u2").unwrap();
        assert_eq!(t.counts.row(u2).len(), 2);
    }

    #[test]
    fn demographics_dat() {
        let (_d, p) = file_with("users.dat", "1::F::1::10::48067\n2::M::56::16::70072\n");
        let mut users = IdMap::new();
        users.intern("2");
        let d = parse_demographics(&p, FileFormat::MovieLensDat, &mut users).unwrap();
        assert_eq!(d.records.len(), 2);
        assert_eq!(d.records[0].as_ref().unwrap().age, 56.0);
        assert_eq!(d.records[1].as_ref().unwrap().gender, "F");
    }
}
