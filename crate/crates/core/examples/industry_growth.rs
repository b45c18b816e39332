//! Industry growth from product baskets, the China sub-sector composite and
//! a cumulative industrial production index.

use std::collections::BTreeMap;

use carbon_pulse::industry::{
    cement_process_emissions, china_industry_growth, decumulate, group_growth, ipi_growth, ProductPair, SubSector,
    SubSectorShare,
};

fn pair(product: &str, weight: f64, q2019: f64, q2020: f64) -> ProductPair {
    ProductPair { product: product.into(), weight, q2019, q2020 }
}

fn main() -> carbon_pulse::Result<()> {
    let mut growth = BTreeMap::new();
    growth.insert(SubSector::Steel, group_growth(&[pair("crude steel", 1.0, 182.0, 176.0)])?);
    growth.insert(SubSector::Cement, group_growth(&[pair("cement", 1.0, 520.0, 395.0)])?);
    growth.insert(
        SubSector::Chemicals,
        group_growth(&[pair("sulfuric acid", 0.25, 23.0, 21.0), pair("soda ash", 0.25, 6.9, 6.5),
                       pair("caustic soda", 0.25, 8.5, 8.1), pair("ethylene", 0.25, 5.2, 5.3)])?,
    );
    growth.insert(
        SubSector::Other,
        group_growth(&[pair("plate glass", 0.5, 240.0, 215.0), pair("paper", 0.5, 31.0, 28.0)])?,
    );
    for (s, g) in &growth {
        println!("{:<10} {:+.2}%", s.as_str(), 100.0 * g);
    }
    let fuel = china_industry_growth(&growth, &SubSectorShare::china_default())?;
    println!("composite  {:+.2}%", 100.0 * fuel);
    println!("process CO2 change on a 259 Mt window baseline: {:+.1} Mt", cement_process_emissions(growth[&SubSector::Cement], 259.0)?);

    // year-to-date index: each month is the running mean of monthly levels
    let c2019: BTreeMap<u32, f64> = [(1, 100.0), (2, 101.0), (3, 101.5)].into_iter().collect();
    let c2020: BTreeMap<u32, f64> = [(1, 99.0), (2, 95.5), (3, 92.0)].into_iter().collect();
    for m in 1..=3 {
        println!(
            "IPI month {m}: monthly level {:.1} vs {:.1}, cumulative growth {:+.2}%",
            decumulate(&c2020, "USA", m)?,
            decumulate(&c2019, "USA", m)?,
            100.0 * ipi_growth(&c2019, &c2020, "USA", m)?
        );
    }
    Ok(())
}
