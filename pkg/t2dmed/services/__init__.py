# Algorithm and experiment services
