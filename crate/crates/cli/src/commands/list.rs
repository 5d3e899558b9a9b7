use bohmlab::families::{list_families, FamilyDescriptor};

use crate::args::ListArgs;
use crate::error::CliError;

/// Rows whose section number is `filter` (`VI` keeps VI.A to VI.D).
pub fn select(filter: Option<&str>) -> Vec<FamilyDescriptor> {
    list_families()
        .into_iter()
        .filter(|d| match filter {
            None => true,
            Some(s) => {
                let s = s.trim();
                d.section == s || d.section.split('.').next() == Some(s)
            }
        })
        .collect()
}

pub fn run(args: &ListArgs) -> Result<(), CliError> {
    let rows = select(args.section.as_deref());
    if rows.is_empty() {
        return Err(CliError::Usage(format!(
            "no family in section `{}`",
            args.section.as_deref().unwrap_or_default()
        )));
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&rows).expect("catalog serializes"));
        return Ok(());
    }
    println!(
        "{:<20} {:<6} {:<16} {:<45} title",
        "id", "sect", "vanishing_bohm", "parameters"
    );
    for d in &rows {
        println!(
            "{:<20} {:<6} {:<16} {:<45} {}",
            d.id,
            d.section,
            d.vanishing_bohm,
            d.parameters.join(","),
            d.title
        );
    }
    Ok(())
}
