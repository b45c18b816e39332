//! Parses a small hourly feed with gaps, duplicates and a spike, then cleans
//! and aggregates it to daily generation.

use carbon_pulse::ingestion::{
    aggregate_daily, build_daily_matrices, clean_matrix, parse_feed_reader, resolve_duplicates, FeedSchema,
};

fn main() -> carbon_pulse::Result<()> {
    let mut csv = String::from("timestamp_utc,interval_min,category,value\n");
    for h in 0..24 {
        let coal = match h {
            5 => "n/e".to_string(),
            9 => "N/A".to_string(),
            14 => "9000".to_string(),
            _ => format!("{}", 500 + (h % 3) * 10),
        };
        csv.push_str(&format!("2020-03-02T{h:02}:00:00Z,60,\"Coal\",{coal}\n"));
        csv.push_str(&format!("2020-03-02T{h:02}:00:00Z,60,\"Gas\",{}\n", 300 + h));
    }
    // a second report of the same slot; the two are averaged
    csv.push_str("2020-03-02T12:00:00Z,60,\"Gas\",330\n");

    let obs = parse_feed_reader(csv.as_bytes(), "inline", "DEMO", &FeedSchema::default())?;
    let dedup = resolve_duplicates(obs);
    println!("duplicates averaged: {:?}", dedup.duplicates);

    for matrix in build_daily_matrices(&dedup.observations)? {
        let (raw, _) = aggregate_daily(&matrix);
        let (cleaned, notes) = clean_matrix(&matrix)?;
        let (daily, omitted) = aggregate_daily(&cleaned);
        println!("{}  ({} samples/day)", matrix.date, matrix.sampling_times());
        for (cat, rep) in &notes {
            println!(
                "  {cat:<5} replaced {} anomalies with {:?}, {} missing, {} not-a-number",
                rep.anomalies_replaced, rep.replacement_value, rep.missing_preserved, rep.not_a_number
            );
        }
        for (cat, mwh) in &daily {
            println!("  {cat:<5} raw {:>9.1} MWh  cleaned {:>9.1} MWh", raw[cat], mwh);
        }
        if !omitted.is_empty() {
            println!("  omitted: {omitted:?}");
        }
    }
    Ok(())
}
