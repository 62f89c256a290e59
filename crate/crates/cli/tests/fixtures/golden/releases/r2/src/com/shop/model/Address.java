package com.shop.model;

public class Address {
    private String street;
    private String city;
    private String zip;

    public String getStreet() {
        return street;
    }

    public String getCity() {
        return city;
    }

    public String getZip() {
        return zip;
    }

    public String label() {
        return street + " " + city + " " + zip;
    }
}
