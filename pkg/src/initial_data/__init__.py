# Initial data profiles, derived quantities and the condition checker
