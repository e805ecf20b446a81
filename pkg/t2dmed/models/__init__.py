# Domain records: tables, preprocessing state, trained models, reports
